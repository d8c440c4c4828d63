"""Colored grid triangulations of R^n and the local-join machinery.

The triangulation is the standard (Freudenthal/Kuhn) one on the scaled
integer lattice: the simplex at base vertex b with coordinate permutation
sigma has vertices b, b+e_{sigma(1)}, b+e_{sigma(1)}+e_{sigma(2)}, ...
Coordinate sums along the chain are consecutive, so the coloring
color(v) = sum(v) mod (n+1) gives every n-simplex all n+1 colors.  Grouping
colors into m+1 blocks of d+1 consecutive colors (n = (m+1)(d+1) - 1)
yields the d-dimensional complexes Z_0..Z_m, the join map tau into the
m-simplex, and the retractions pi_i moving points by less than the simplex
diameter h*sqrt(n).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels as kern
from .complexes import PLMapSampled
from .width import WidthCertificate


@dataclass(frozen=True)
class FreudenthalSimplex:
    """One simplex of the grid triangulation: lattice base plus permutation."""

    base: tuple[int, ...]
    perm: tuple[int, ...]
    h: float

    def lattice_vertices(self) -> np.ndarray:
        n = len(self.base)
        V = np.zeros((n + 1, n), dtype=np.int64)
        V[0] = self.base
        for j, ax in enumerate(self.perm):
            V[j + 1] = V[j]
            V[j + 1, ax] += 1
        return V

    def vertices(self) -> np.ndarray:
        return self.lattice_vertices() * self.h

    def colors(self) -> np.ndarray:
        n = len(self.base)
        s0 = int(sum(self.base)) % (n + 1)
        return (s0 + np.arange(n + 1)) % (n + 1)


@dataclass(frozen=True)
class ColoredTriangulation:
    """Implicit grid triangulation of R^n at scale h with the mod-(n+1)
    coloring."""

    n: int
    h: float

    def __post_init__(self):
        if self.n < 1 or self.h <= 0:
            raise ValueError("need n >= 1 and h > 0")

    @property
    def simplex_diameter(self) -> float:
        return self.h * float(np.sqrt(self.n))

    def locate(self, x) -> FreudenthalSimplex:
        """Simplex containing x; ties on faces break to the lexicographically
        smallest sorting permutation."""
        x = np.asarray(x, dtype=float)
        u = x / self.h
        b = np.floor(u)
        frac = u - b
        order = np.argsort(-frac, kind="stable")
        return FreudenthalSimplex(tuple(int(v) for v in b), tuple(int(a) for a in order), self.h)

    def barycentric(self, x):
        """(simplex, weights) of x; weights follow the vertex chain order."""
        x = np.asarray(x, dtype=float)
        s = self.locate(x)
        frac = x / self.h - np.array(s.base)
        fs = frac[list(s.perm)]
        n = self.n
        lam = np.empty(n + 1)
        lam[0] = 1.0 - fs[0]
        lam[1:n] = fs[:-1] - fs[1:]
        lam[n] = fs[-1]
        return s, lam

    def vertex_color(self, lattice_pt) -> int:
        return int(sum(int(c) for c in lattice_pt)) % (self.n + 1)


def locate_simplex(x, tri: ColoredTriangulation) -> FreudenthalSimplex:
    return tri.locate(x)


@dataclass(frozen=True)
class JoinCoords:
    """Join coordinates of a point: mixture weights t over the m-simplex and
    the block points z_i in Z_i for every positive weight."""

    t: np.ndarray
    z: dict[int, np.ndarray]
    x: np.ndarray

    def reconstruct(self) -> np.ndarray:
        out = np.zeros_like(self.x)
        for i, ti in enumerate(self.t):
            if ti > 0:
                out = out + ti * self.z[i]
        return out


class DualComplexError(ValueError):
    pass


@dataclass(frozen=True)
class JoinDecomposition:
    """Local-join structure: blocks of d+1 colors give Z_0..Z_m with
    R^n = join of the Z_i along every simplex."""

    tri: ColoredTriangulation
    m: int
    d: int

    def __post_init__(self):
        if self.tri.n != (self.m + 1) * (self.d + 1) - 1:
            raise ValueError("need n = (m+1)(d+1) - 1")

    @property
    def n(self) -> int:
        return self.tri.n

    def block_of_color(self, c: int) -> int:
        return c // (self.d + 1)

    def join_batch(self, X: np.ndarray):
        """Vectorized join data: block weights t (N, m+1) and block points
        z (N, m+1, n), nan where t_i = 0."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        t, z, _, _, _ = kern.join_batch(X, self.tri.h, self.d)
        return t, z

    def join_coords(self, x) -> JoinCoords:
        x = np.asarray(x, dtype=float)
        t, z = self.join_batch(x[None, :])
        zz = {i: z[0, i].copy() for i in range(self.m + 1) if t[0, i] > 0}
        return JoinCoords(t=t[0], z=zz, x=x)

    def tau(self, x) -> np.ndarray:
        return self.join_coords(x).t

    def tau_batch(self, X) -> np.ndarray:
        return self.join_batch(X)[0]

    def pi(self, x, i: int) -> np.ndarray:
        """Retraction onto Z_i; defined where t_i > 0, moves the point by
        less than the simplex diameter."""
        jc = self.join_coords(x)
        if jc.t[i] <= 0:
            raise DualComplexError(f"point lies in the dual complex of Z_{i} (t_{i} = 0)")
        return jc.z[i]

    def in_block_complex(self, x, i: int, tol: float = 1e-12) -> bool:
        return bool(self.tau(x)[i] >= 1.0 - tol)


def join_coords(x, J: JoinDecomposition) -> JoinCoords:
    return J.join_coords(x)


def tau(x, J: JoinDecomposition) -> np.ndarray:
    return J.tau(x)


def pi_i(x, J: JoinDecomposition, i: int) -> np.ndarray:
    return J.pi(x, i)


def sample_unit_ball(rng: np.random.Generator, n_pts: int, dim: int) -> np.ndarray:
    g = rng.normal(size=(n_pts, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.uniform(0.0, 1.0, size=(n_pts, 1)) ** (1.0 / dim)
    return g * r


@dataclass
class BallSimplexConstruction:
    """Join map restricted to the unit ball: B^n -> Delta^m with every fiber
    admitting a witness retraction onto some Z_i whose fibers have diameter
    below eps."""

    m: int
    d: int
    eps: float
    join: JoinDecomposition
    map: PLMapSampled = field(init=False)

    def __post_init__(self):
        self.map = PLMapSampled(
            sample=lambda rng, k: sample_unit_ball(rng, k, self.n),
            evaluate=lambda X: self.join.tau_batch(X),
            target_dim=self.m,
            meta={"kind": "ball-simplex", "m": self.m, "d": self.d,
                  "eps": self.eps, "h": self.join.tri.h})

    @property
    def n(self) -> int:
        return self.join.n

    def witness_index(self, t: np.ndarray) -> int:
        """Pick i with t_i != 0: largest weight, then smallest index."""
        t = np.asarray(t, float)
        if t.max() <= 0:
            raise ValueError("t must be a point of the simplex")
        return int(np.argmax(t))

    def fiber_witness(self, t: np.ndarray):
        """(i, witness): the retraction pi_i restricted to the fiber over t."""
        i = self.witness_index(t)

        def witness(X: np.ndarray) -> np.ndarray:
            _, z = self.join.join_batch(X)
            return z[:, i, :]

        return i, witness

    def fiber_samples(self, t: np.ndarray, n_samples: int,
                      rng: np.random.Generator,
                      base: Optional[tuple] = None):
        """Sample the fiber over t by re-mixing the join coordinates of ball
        samples: x = sum t_i z_i(x0) lies on the fiber and in the simplex of
        x0.  Returns (points, witness_values)."""
        t = np.asarray(t, float)
        if base is None:
            X0 = sample_unit_ball(rng, n_samples, self.n)
            tb, zb = self.join.join_batch(X0)
        else:
            tb, zb = base
        need = np.flatnonzero(t > 0)
        ok = np.ones(len(tb), dtype=bool)
        for i in need:
            ok &= tb[:, i] > 0
        z = zb[ok]
        pts = np.zeros((ok.sum(), self.n))
        for i in need:
            pts += t[i] * z[:, i, :]
        inside = np.linalg.norm(pts, axis=1) <= 1.0
        i_wit = self.witness_index(t)
        return pts[inside], z[inside][:, i_wit, :]

    def witness_certificate(self, t_values: np.ndarray, n_samples: int = 100_000,
                            delta: float = 1e-3, seed: int = 0) -> WidthCertificate:
        """Measure witness-fiber diameters over many target values.

        Fiber points are binned by the delta-grid of their witness image;
        two points of a bin are within 2*h*sqrt(n) + delta*sqrt(n), so the
        certified bound is below eps by construction.
        """
        rng = np.random.default_rng(seed)
        X0 = sample_unit_ball(rng, n_samples, self.n)
        base = self.join.join_batch(X0)
        worst = 0.0
        per_t = {}
        for k, t in enumerate(np.atleast_2d(t_values)):
            pts, wit = self.fiber_samples(t, n_samples, rng, base=base)
            if len(pts) == 0:
                continue
            perm, starts = kern.bin_indices(wit, delta)
            diams = kern.group_diameters(pts[perm], starts)
            mx = float(diams.max()) if len(diams) else 0.0
            per_t[f"t{k}"] = mx
            worst = max(worst, mx)
        bound = 2 * self.join.tri.simplex_diameter + delta * np.sqrt(self.n)
        return WidthCertificate(
            kind="ball-simplex-witness",
            inputs={"m": self.m, "d": self.d, "eps": self.eps,
                    "h": self.join.tri.h, "delta": delta},
            method="sampled", W=worst, fiber_table=per_t, delta=delta,
            seed=seed, sample_count=n_samples,
            extra={"certified_bound": float(bound), "passes": bool(worst < self.eps)})


def ball_simplex_map(m: int, d: int, eps: float,
                     h_factor: float = 0.98) -> BallSimplexConstruction:
    """Construct tau restricted to the unit ball on a decomposition fine
    enough that witness fibers stay below eps (h < eps / (2 sqrt(n)))."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not (0 < h_factor < 1):
        raise ValueError("h_factor must be in (0, 1)")
    n = (m + 1) * (d + 1) - 1
    h = h_factor * eps / (2.0 * np.sqrt(n))
    tri = ColoredTriangulation(n=n, h=h)
    return BallSimplexConstruction(m=m, d=d, eps=eps,
                                   join=JoinDecomposition(tri=tri, m=m, d=d))


# -- the cube example ----------------------------------------------------------


@dataclass
class GromovCubeConstruction:
    """The map f(x) = d(x,Z0) / (d(x,Z0) + d(x,Z1)) on the unit cube, where
    Z0 is the 1-skeleton of the eps-grid and Z1 the 1-skeleton of the dual
    grid, with two-sided witness retractions by composed radial projections
    (cube center -> face center -> edge)."""

    eps: float
    map: PLMapSampled = field(init=False)

    def __post_init__(self):
        inv = 1.0 / self.eps
        if abs(inv - round(inv)) > 1e-9:
            raise ValueError("1/eps must be an integer so the grid fits the cube")
        self.map = PLMapSampled(
            sample=lambda rng, k: rng.uniform(0.0, 1.0, size=(k, 3)),
            evaluate=self.evaluate,
            target_dim=1,
            meta={"kind": "gromov-cube", "eps": self.eps})

    def skeleton_distances(self, X: np.ndarray):
        return kern.cube_skeleton_dists(np.atleast_2d(np.asarray(X, float)), self.eps)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        d0, d1 = self.skeleton_distances(X)
        return (d0 / (d0 + d1))[:, None]

    def witness(self, X: np.ndarray, side: str) -> np.ndarray:
        """Retraction of low fibers onto Z0 ('low') or high fibers onto Z1
        ('high') by composed radial projections."""
        X = np.atleast_2d(np.asarray(X, float))
        if side == "low":
            return kern.cube_witness(X, self.eps, False)
        if side == "high":
            return kern.cube_witness(X, self.eps, True)
        raise ValueError("side must be 'low' or 'high'")

    def witness_certificate(self, y_values, n_samples: int = 50_000,
                            seed: int = 0, slab: float = 0.01,
                            delta: Optional[float] = None,
                            anchors_per_y: int = 12,
                            local_samples: int = 4_000) -> WidthCertificate:
        """Measure witness-fiber diameters over sampled fiber values.

        For each y, anchor points are drawn from the slab |f - y| <= slab;
        around each anchor a local cloud is sampled and the diameter of
        {x in slab : |witness(x) - witness(anchor)|_inf <= delta} is taken.
        All length scales are proportional to eps, so the measured constant
        C = max diameter / eps is comparable across grid scales."""
        delta = delta if delta is not None else self.eps / 2.0
        rng = np.random.default_rng(seed)
        X = rng.uniform(0.0, 1.0, size=(n_samples, 3))
        f = self.evaluate(X)[:, 0]
        worst = 0.0
        max_disp = 0.0
        per_y = {}
        reach = 1.6 * self.eps
        for y in np.atleast_1d(y_values):
            mask = np.abs(f - y) <= slab
            pts = X[mask]
            if len(pts) == 0:
                continue
            side = "low" if y <= 0.5 else "high"
            wit_all = self.witness(pts, side)
            max_disp = max(max_disp, float(np.linalg.norm(wit_all - pts, axis=1).max()))
            anchor_idx = rng.choice(len(pts), size=min(anchors_per_y, len(pts)),
                                    replace=False)
            mx = 0.0
            for ai in anchor_idx:
                a = pts[ai]
                cloud = a + rng.uniform(-reach, reach, size=(local_samples, 3))
                cloud = cloud[((cloud >= 0) & (cloud <= 1)).all(axis=1)]
                fc = self.evaluate(cloud)[:, 0]
                cloud = cloud[np.abs(fc - y) <= slab]
                if len(cloud) == 0:
                    continue
                wc = self.witness(cloud, side)
                near = np.abs(wc - wit_all[ai]).max(axis=1) <= delta
                grp = np.vstack([cloud[near], a[None, :]])
                mx = max(mx, float(kern.pairwise_diameter(grp)))
            per_y[f"y={y:.4f}"] = mx
            worst = max(worst, mx)
        return WidthCertificate(
            kind="gromov-cube-witness",
            inputs={"eps": self.eps, "slab": slab, "delta": delta},
            method="sampled", W=worst, fiber_table=per_y, delta=delta,
            seed=seed, sample_count=n_samples,
            extra={"C": worst / self.eps, "max_displacement": max_disp,
                   "max_displacement_over_eps": max_disp / self.eps,
                   "anchors_per_y": anchors_per_y,
                   "local_samples": local_samples})


def gromov_cube_map(eps: float) -> GromovCubeConstruction:
    return GromovCubeConstruction(eps=eps)
