"""The perturbed-projection bundle metric and its small-width fiber
witnesses.

The total space is R^(dimF) x R^m with the projection p to the second
factor; the join map of a local-join decomposition of the first factor
perturbs p to p_tau = p - tau o p_F, and in the coordinates
Phi = (p_F, p_tau) the metric is conformal: scale 1 on the core where both
coordinate norms are at most 2, squeezed down to eps (tensor scale) where
the y'-bump or the f-bump dies.  Fibers of p then admit the witness
(pi_i, tau) into (Z_i x Delta^m) / (Z_i x v_i_opposite) with pi-fiber
diameters of order eps (the join scale) and the pinched dual part living in
the squeezed zone.

Distances are estimated on a k-nearest-neighbor sample graph in the Phi
coordinates (edge weight: segment length under the midpoint tensor),
refined by exact straight-segment quadrature whenever the segment stays in
the carrier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .localjoin import ColoredTriangulation, JoinDecomposition
from .width import WidthCertificate, ball_width_reference


def _smoothstep5(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


@dataclass(frozen=True)
class BumpFunction:
    """Radial cut-off: 1 inside radius r, 0 beyond 1.1 r, quintic-smooth
    monotone transition in between."""

    r: float
    k: int

    def profile(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return 1.0 - _smoothstep5((u - 1.0) / 0.1)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.profile(np.linalg.norm(x, axis=1) / self.r)


def regular_simplex_vertices(m: int, inradius: float = 3.0) -> np.ndarray:
    """Vertices of a regular m-simplex in R^m centered at the origin with
    the given inradius (circumradius = m * inradius)."""
    if m < 1:
        raise ValueError("need m >= 1")
    E = np.eye(m + 1)
    C = E - E.mean(axis=0)
    # orthonormal basis of the sum-zero hyperplane
    _u, _s, vt = np.linalg.svd(C, full_matrices=False)
    basis = vt[:m]
    V = C @ basis.T
    V *= (m * inradius) / np.linalg.norm(V[0])
    return V


class NonSmoothLocusError(ValueError):
    pass


@dataclass
class BundleConstruction:
    """The compactified bundle: fiber factor F = R^(mk+m+k) with an
    eps-scale local-join decomposition into k-complexes Z_0..Z_m, base
    factor Y = R^m, target simplex of inradius 3, carrier
    B_3(F) x B_(3+m)(Y)."""

    m: int
    k: int
    eps: float
    h_factor: float = 0.98
    join: JoinDecomposition = field(init=False)
    delta_vertices: np.ndarray = field(init=False)

    def __post_init__(self):
        if not (0 < self.eps < 1):
            raise ValueError("eps must lie in (0, 1)")
        if self.m < 1 or self.k < 0:
            raise ValueError("need m >= 1, k >= 0")
        dim_f = self.dim_f
        h = self.h_factor * self.eps / np.sqrt(dim_f)
        tri = ColoredTriangulation(n=dim_f, h=h)
        self.join = JoinDecomposition(tri=tri, m=self.m, d=self.k)
        self.delta_vertices = regular_simplex_vertices(self.m, inradius=3.0)

    # -- dimensions and coordinates ------------------------------------------

    @property
    def dim_f(self) -> int:
        return self.m * self.k + self.m + self.k

    @property
    def n(self) -> int:
        return self.dim_f + self.m

    @property
    def carrier_radius_f(self) -> float:
        return 3.0

    @property
    def carrier_radius_y(self) -> float:
        return 3.0 + self.m

    def split(self, x: np.ndarray):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return x[:, :self.dim_f], x[:, self.dim_f:]

    def tau_point(self, f: np.ndarray) -> np.ndarray:
        """Join map into the embedded simplex (cartesian coordinates)."""
        t = self.join.tau_batch(np.atleast_2d(f))
        return t @ self.delta_vertices

    def p(self, x: np.ndarray) -> np.ndarray:
        return self.split(x)[1]

    def p_f(self, x: np.ndarray) -> np.ndarray:
        return self.split(x)[0]

    def p_tau(self, x: np.ndarray) -> np.ndarray:
        f, y = self.split(x)
        return y - self.tau_point(f)

    def phi(self, x: np.ndarray) -> np.ndarray:
        f, y = self.split(x)
        return np.hstack([f, y - self.tau_point(f)])

    def phi_inv(self, xp: np.ndarray) -> np.ndarray:
        f, yp = self.split(xp)
        return np.hstack([f, yp + self.tau_point(f)])

    def in_carrier(self, x: np.ndarray) -> np.ndarray:
        f, y = self.split(x)
        return ((np.linalg.norm(f, axis=1) <= self.carrier_radius_f + 1e-12)
                & (np.linalg.norm(y, axis=1) <= self.carrier_radius_y + 1e-12))

    # -- the metric -------------------------------------------------------------

    def metric_scale(self, xp: np.ndarray) -> np.ndarray:
        """Conformal factor of the primed metric at Phi-coordinates:
        eps + (1-eps) phi_2(f) phi_2(y'); the whole (1-eps) term dies as
        soon as either bump does, so the squeezed zone is uniformly eps."""
        f, yp = self.split(xp)
        bf = BumpFunction(2.0, self.dim_f)(f)
        by = BumpFunction(2.0, self.m)(yp)
        return self.eps + (1.0 - self.eps) * bf * by

    def metric_prime(self, xp: np.ndarray) -> np.ndarray:
        """SPD matrix of the primed metric at one Phi-point."""
        s = self.metric_scale(np.atleast_2d(xp))
        return float(s[0]) * np.eye(self.n)

    def tau_jacobian(self, f: np.ndarray, strict: bool = False,
                     tol: float = 1e-9) -> np.ndarray:
        """Piecewise-constant Jacobian of the embedded join map at f."""
        f = np.asarray(f, dtype=float)
        tri = self.join.tri
        s = tri.locate(f)
        if strict:
            frac = np.sort((f / tri.h) - np.floor(f / tri.h))[::-1]
            gaps = np.concatenate([[1.0 - frac[0]], -np.diff(frac), [frac[-1]]])
            if gaps.min() < tol:
                raise NonSmoothLocusError(
                    "point on a triangulation face; use mollified mode")
        colors = s.colors()
        blocks = colors // (self.k + 1)
        W = self.delta_vertices[blocks]          # (dim_f + 1, m)
        J = np.zeros((self.m, self.dim_f))
        for q in range(1, self.dim_f + 1):
            axis = s.perm[q - 1]
            J[:, axis] = (W[q] - W[q - 1]) / tri.h
        return J

    def phi_jacobian(self, x: np.ndarray, mollified: bool = True,
                     seed: int = 0) -> np.ndarray:
        """Jacobian of Phi at x: identity on F, -J_tau coupling into Y.

        Mollified mode averages J_tau over a kernel ball of radius h/10,
        matching the smoothed coordinate change; strict mode errors on the
        non-smooth locus."""
        f, _y = self.split(np.atleast_2d(x))
        f = f[0]
        if mollified:
            h = self.join.tri.h
            rng = np.random.default_rng(seed)
            offsets = [np.zeros(self.dim_f)]
            offsets += list((h / 10) * np.eye(self.dim_f))
            offsets += list((-h / 10) * np.eye(self.dim_f))
            offsets += list((h / 10) * rng.normal(size=(8, self.dim_f))
                            / np.sqrt(self.dim_f))
            Jt = np.mean([self.tau_jacobian(f + o) for o in offsets], axis=0)
        else:
            Jt = self.tau_jacobian(f, strict=True)
        J = np.eye(self.n)
        J[self.dim_f:, :self.dim_f] = -Jt
        return J

    def metric_pullback(self, x: np.ndarray, mollified: bool = True,
                        seed: int = 0) -> np.ndarray:
        """g_X at x: the primed metric pulled back through Phi."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        J = self.phi_jacobian(x, mollified=mollified, seed=seed)
        gp = self.metric_scale(self.phi(x))[0]
        return gp * (J.T @ J)

    # -- distances on the sample graph --------------------------------------------

    def sample_carrier(self, n_samples: int, rng: np.random.Generator,
                       seed: Optional[int] = None) -> np.ndarray:
        """Quasi-random carrier samples.  With a seed, points come from a
        scrambled Sobol sequence, so larger sample counts are refinements
        of smaller ones (nested resolutions)."""
        from scipy.stats import norm, qmc

        def split_ball(U, dim, radius):
            g = norm.ppf(np.clip(U[:, :dim], 1e-12, 1 - 1e-12))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            r = radius * U[:, dim:dim + 1] ** (1.0 / dim)
            return g * r

        d = self.dim_f + 1 + self.m + 1
        if seed is not None:
            sob = qmc.Sobol(d, scramble=True, seed=seed)
            full = 1 << int(np.ceil(np.log2(max(n_samples, 2))))
            U = sob.random(full)[:n_samples]
        else:
            U = rng.uniform(0, 1, size=(n_samples, d))
        f = split_ball(U[:, :self.dim_f + 1], self.dim_f, self.carrier_radius_f)
        y = split_ball(U[:, self.dim_f + 1:], self.m, self.carrier_radius_y)
        return np.hstack([f, y])

    def segment_length(self, a_phi: np.ndarray, b_phi: np.ndarray,
                       quad: int = 32) -> float:
        """Length of the straight Phi-segment under the conformal metric;
        inf if the segment leaves the carrier."""
        ts = (np.arange(quad) + 0.5) / quad
        pts = a_phi[None, :] * (1 - ts[:, None]) + b_phi[None, :] * ts[:, None]
        if not self.in_carrier(self.phi_inv(pts)).all():
            return float("inf")
        s = self.metric_scale(pts)
        return float(np.sqrt(s).mean() * np.linalg.norm(b_phi - a_phi))


class CarrierGraph:
    """k-nearest-neighbor sample graph of the carrier in Phi coordinates;
    edge weights are segment lengths under the midpoint tensor."""

    def __init__(self, bundle: BundleConstruction, n_samples: int = 20_000,
                 n_neighbors: int = 16, seed: int = 0,
                 extra_phi: Optional[np.ndarray] = None):
        self.bundle = bundle
        rng = np.random.default_rng(seed)
        X = bundle.sample_carrier(n_samples, rng, seed=seed)
        P = bundle.phi(X)
        if extra_phi is not None and len(extra_phi):
            P = np.vstack([P, np.atleast_2d(extra_phi)])
        self.points = P
        self.n_base = n_samples
        tree = cKDTree(P)
        dist, idx = tree.query(P, k=n_neighbors + 1)
        rows, cols, vals = [], [], []
        for j in range(1, n_neighbors + 1):
            mid = (P + P[idx[:, j]]) / 2
            s = bundle.metric_scale(mid)
            w = np.sqrt(s) * dist[:, j]
            rows.append(np.arange(len(P)))
            cols.append(idx[:, j])
            vals.append(w)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        self.graph = csr_matrix((np.concatenate([vals, vals]),
                                 (np.concatenate([rows, cols]),
                                  np.concatenate([cols, rows]))),
                                shape=(len(P), len(P)))
        self.meta = {"n_samples": n_samples, "n_neighbors": n_neighbors,
                     "seed": seed}

    def distances_from(self, indices) -> np.ndarray:
        return dijkstra(self.graph, directed=False, indices=indices)


def distance_estimate(bundle: BundleConstruction, x1, x2,
                      resolution: int = 20_000, n_neighbors: int = 16,
                      seed: int = 0) -> dict:
    """Distance between two carrier points under the bundle metric:
    the smaller of the sample-graph shortest path and the straight-segment
    quadrature (both are upper estimates of the geodesic length)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    for x in (x1, x2):
        if not bundle.in_carrier(x[None, :])[0]:
            raise ValueError("point outside the carrier")
    p1 = bundle.phi(x1[None, :])[0]
    p2 = bundle.phi(x2[None, :])[0]
    graph = CarrierGraph(bundle, n_samples=resolution,
                         n_neighbors=n_neighbors, seed=seed,
                         extra_phi=np.vstack([p1, p2]))
    i1 = len(graph.points) - 2
    i2 = len(graph.points) - 1
    d = graph.distances_from([i1])[0, i2]
    if not np.isfinite(d):
        raise ValueError("resolution too coarse to connect the points")
    seg = bundle.segment_length(p1, p2)
    return {"distance": float(min(d, seg)), "graph": float(d),
            "segment": float(seg), "resolution": resolution,
            "n_neighbors": n_neighbors, "seed": seed}


# -- fiber witness ------------------------------------------------------------------


def facet_distances(bundle: BundleConstruction, y: np.ndarray) -> np.ndarray:
    """Affine distances from y to the hyperplanes of the simplex facets
    (positive on the vertex side); they sum to 3 (m+1)."""
    y = np.asarray(y, dtype=float)
    V = bundle.delta_vertices
    m = bundle.m
    out = np.empty(m + 1)
    for i in range(m + 1):
        facet = np.delete(V, i, axis=0)
        c = facet.mean(axis=0)
        nrm = V[i] - c
        nrm = nrm / np.linalg.norm(nrm)
        out[i] = float(nrm @ (y - c))
    return out


def fiber_metric_scale(bundle: BundleConstruction, y: np.ndarray,
                       F: np.ndarray) -> np.ndarray:
    """Conformal factor of the metric restricted to the fiber over y:
    eps plus the bump term supported where tau(f) is 2.2-close to y."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    yp = np.broadcast_to(np.atleast_1d(y), (len(F), bundle.m))         - bundle.tau_point(F)
    bf = BumpFunction(2.0, bundle.dim_f)(F)
    by = BumpFunction(2.0, bundle.m)(yp)
    return bundle.eps + (1.0 - bundle.eps) * bf * by


def fiber_segment_length(bundle: BundleConstruction, y, fa, fb,
                         quad: int = 128) -> float:
    """Length of the straight fiber segment from fa to fb under the
    fiber-restricted conformal metric (always a valid fiber path)."""
    ts = (np.arange(quad) + 0.5) / quad
    pts = fa[None, :] * (1 - ts[:, None]) + fb[None, :] * ts[:, None]
    s = fiber_metric_scale(bundle, y, pts)
    return float(np.sqrt(s).mean() * np.linalg.norm(fb - fa))


def fiber_witness_bundle(bundle: BundleConstruction, y,
                         n_fiber: int = 20_000, seed: int = 0,
                         delta: Optional[float] = None,
                         star_tol: float = 0.02,
                         n_graph: int = 20_000,
                         n_neighbors: int = 12,
                         n_anchors: int = 24,
                         local_samples: int = 4_000) -> WidthCertificate:
    """Witness certificate for the fiber over y.

    Picks i with the facet v_i_opposite at distance > 2.2 from y (exists
    since the inradius is 3), maps fiber points off the dual complex to
    (pi_i, tau) and the dual part to the pinched point.  Distances inside
    the fiber use its restricted metric, the conformal factor
    eps + (1-eps) phi(f) phi(y - tau(f)) on flat fiber coordinates.

    Reports the max sampled pi-fiber diameter (anchors plus local clouds,
    matched by witness image at resolution delta, fiber-segment quadrature)
    as C * eps: these scale linearly in eps since every involved length is
    proportional to the join scale.  The pinched dual part is reported
    separately via a k-nearest-neighbor graph on the fiber samples: it
    lives in the squeezed zone, where the tensor floor eps gives lengths
    of order sqrt(eps).
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    delta = delta if delta is not None else bundle.eps / 4.0
    fd = facet_distances(bundle, y)
    i = int(np.argmax(fd))
    if fd[i] <= 2.2:
        raise AssertionError("no admissible witness index; inradius violated")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n_fiber, bundle.dim_f))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = bundle.carrier_radius_f * rng.uniform(0, 1, (n_fiber, 1)) ** (1.0 / bundle.dim_f)
    F = g * r
    t, z = bundle.join.join_batch(F)
    star = t[:, i] <= star_tol

    def witness_values(fpts):
        tt, zz = bundle.join.join_batch(fpts)
        return np.hstack([zz[:, i, :], tt @ bundle.delta_vertices]), tt[:, i]

    # pi-fiber diameters via anchors: sample densely around fiber points and
    # measure the spread of matching witness values (all scales follow eps)
    ok_idx = np.flatnonzero(~star & (t[:, i] > 2 * star_tol))
    anchors = ok_idx[rng.choice(len(ok_idx), size=min(n_anchors, len(ok_idx)),
                                replace=False)]
    worst = 0.0
    reach = 1.5 * bundle.eps
    cap = 12
    for ai in anchors:
        f0 = F[ai]
        t0 = t[ai]
        z0 = z[ai, i]
        cloud = f0 + rng.uniform(-reach, reach,
                                 size=(local_samples, bundle.dim_f))
        cloud = cloud[np.linalg.norm(cloud, axis=1)
                      <= bundle.carrier_radius_f]
        tc, zc = bundle.join.join_batch(cloud)
        need = np.flatnonzero(t0 > 0)
        ok = np.ones(len(cloud), dtype=bool)
        for l in need:
            ok &= tc[:, l] > 0
        zc = zc[ok]
        # remix to the anchor's tau value: exact tau-match by construction
        pts = np.zeros((ok.sum(), bundle.dim_f))
        for l in need:
            pts += t0[l] * zc[:, l, :]
        near = (np.abs(zc[:, i, :] - z0).max(axis=1) <= delta)             & (np.linalg.norm(pts, axis=1) <= bundle.carrier_radius_f)
        pts = np.vstack([pts[near], f0[None, :]])
        if len(pts) > cap:
            pts = pts[np.linspace(0, len(pts) - 1, cap).astype(int)]
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                d = fiber_segment_length(bundle, y, pts[a], pts[b])
                if d > worst:
                    worst = d
    # pinched dual part: k-NN graph over the fiber samples under the
    # fiber-restricted metric
    star_diam = 0.0
    star_idx = np.flatnonzero(star)
    if len(star_idx) >= 2:
        nodes = F[:min(n_graph, len(F))]
        tree = cKDTree(nodes)
        kq = min(n_neighbors + 1, len(nodes))
        dist, idx = tree.query(nodes, k=kq)
        rows, cols, vals = [], [], []
        for j in range(1, kq):
            mid = (nodes + nodes[idx[:, j]]) / 2
            w = np.sqrt(fiber_metric_scale(bundle, y, mid)) * dist[:, j]
            rows.append(np.arange(len(nodes)))
            cols.append(idx[:, j])
            vals.append(w)
        rows, cols = np.concatenate(rows), np.concatenate(cols)
        vals = np.concatenate(vals)
        graph = csr_matrix((np.concatenate([vals, vals]),
                            (np.concatenate([rows, cols]),
                             np.concatenate([cols, rows]))),
                           shape=(len(nodes), len(nodes)))
        reps = star_idx[np.linspace(0, len(star_idx) - 1,
                                    min(12, len(star_idx))).astype(int)]
        reps = reps[reps < len(nodes)]
        D = dijkstra(graph, directed=False, indices=reps)[:, reps]
        for a in range(len(reps)):
            for b in range(a + 1, len(reps)):
                seg = fiber_segment_length(bundle, y, nodes[reps[a]],
                                           nodes[reps[b]])
                D[a, b] = min(D[a, b], seg)
                D[b, a] = D[a, b]
        finite = D[np.isfinite(D)]
        star_diam = float(finite.max()) if len(finite) else 0.0
    return WidthCertificate(
        kind="bundle-fiber-witness",
        inputs={"m": bundle.m, "k": bundle.k, "eps": bundle.eps,
                "y": [float(v) for v in y], "delta": delta,
                "star_tol": star_tol},
        method="sampled", W=worst, fiber_table={"worst_bin": float(worst)},
        delta=delta, seed=seed, sample_count=n_fiber,
        extra={"witness_index": i, "C": worst / bundle.eps,
               "star_diameter": star_diam,
               "star_over_sqrt_eps": star_diam / np.sqrt(bundle.eps),
               "facet_distance": float(fd[i])})


def core_identity_check(bundle: BundleConstruction, n_samples: int = 10_000,
                        seed: int = 0, tol: float = 1e-12) -> dict:
    """The primed metric must be the identity wherever both coordinate
    norms are at most 2; any violation is fatal.  Cross-references the
    closed-form ball width of the core, which exceeds 1."""
    rng = np.random.default_rng(seed)

    def ball(npts, dim, radius):
        g = rng.normal(size=(npts, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g * (radius * rng.uniform(0, 1, (npts, 1)) ** (1.0 / dim))

    P = np.hstack([ball(n_samples, bundle.dim_f, 2.0),
                   ball(n_samples, bundle.m, 2.0)])
    s = bundle.metric_scale(P)
    dev = float(np.abs(s - 1.0).max())
    if dev > tol:
        raise AssertionError(f"core metric deviates from identity by {dev}")
    ref = ball_width_reference(bundle.n)
    if ref <= 1.0:
        raise AssertionError("reference core width must exceed 1")
    return {"max_identity_deviation": dev, "samples": n_samples,
            "ball_width_reference": ref, "reference_exceeds_one": True,
            "seed": seed}
