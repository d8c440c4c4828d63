"""Widths of maps and covers.

Fiber diameters of simplicial maps are exact: over a target point the fiber
is a finite union of convex polytopes (one per source simplex), and the
diameter of a union of convex sets is attained at piece vertices, which for
simplicial maps are grouped-vertex mixtures enumerable in closed form.
Everything sampled (multiplicity counts, sampled-mode widths) records its
sample count and seed in the emitted certificate.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import _kernels as kern
from .complexes import (PLMapSampled, Simplex, SimplicialComplex, SimplicialMap,
                        barycentric_subdivide)


class EmptyFiberError(ValueError):
    pass


class CoverageError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MultiplicityError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


# -- reference values ---------------------------------------------------------


def ball_width_reference(n: int) -> float:
    """Codimension-1 width of the euclidean unit n-ball, sqrt((2n+2)/n)."""
    if n < 1:
        raise ValueError("ball_width_reference requires n >= 1")
    return float(np.sqrt((2.0 * n + 2.0) / n))


# -- fiber points and exact fiber diameters ----------------------------------


def locate_in_complex(K: SimplicialComplex, y: np.ndarray, tol: float = 1e-9):
    """Barycentric location of a euclidean point in an embedded complex.

    Returns (cell, weights) with positive weights summing to 1; the first
    maximal simplex containing y (in sorted order) wins ties on faces.
    """
    y = np.asarray(y, dtype=float)
    for s in K.maximal_simplices():
        P = K.points(s)
        A = np.vstack([P.T, np.ones(len(s))])
        b = np.concatenate([y, [1.0]])
        lam, res, rank, _ = np.linalg.lstsq(A, b, rcond=None)
        if np.linalg.norm(A @ lam - b) > tol:
            continue
        if (lam < -tol).any():
            continue
        lam = np.clip(lam, 0.0, None)
        lam = lam / lam.sum()
        keep = lam > tol
        cell = tuple(v for v, k in zip(s, keep) if k)
        w = lam[keep]
        return cell, w / w.sum()
    raise EmptyFiberError(f"point {y} is not in the realization")


class FiberEnumerator:
    """Exact fiber-piece vertex enumeration for a simplicial map with an
    embedded source."""

    def __init__(self, f: SimplicialMap):
        if f.source.coords is None:
            raise ValueError("exact fibers need an embedded source")
        self.map = f
        self.groups: list[tuple[Simplex, dict[int, list[int]]]] = []
        for s in f.source.maximal_simplices():
            g: dict[int, list[int]] = {}
            for v in s:
                g.setdefault(f.vertex_map[v], []).append(v)
            self.groups.append((s, g))

    def piece_vertex_arrays(self, cell: Simplex, weights: np.ndarray) -> list[np.ndarray]:
        """Vertex sets of the convex fiber pieces over a target point."""
        out = []
        src = self.map.source
        cset = list(cell)
        for s, g in self.groups:
            if any(w not in g for w in cset):
                continue
            reps = [g[w] for w in cset]
            pts = []
            coords = {v: src.point(v) for vs in reps for v in vs}
            for combo in itertools.product(*reps):
                x = np.zeros(src.embed_dim)
                for t, v in zip(weights, combo):
                    x = x + t * coords[v]
                pts.append(x)
            out.append(np.array(pts))
        return out

    def fiber_vertices(self, cell: Simplex, weights: np.ndarray) -> np.ndarray:
        arrays = self.piece_vertex_arrays(cell, weights)
        if not arrays:
            raise EmptyFiberError(f"empty fiber over {cell} at {weights}")
        return np.vstack(arrays)

    def diameter(self, cell: Simplex, weights: np.ndarray) -> float:
        return float(kern.pairwise_diameter(self.fiber_vertices(cell, weights)))


def fiber_diameter_exact(f: SimplicialMap, y) -> float:
    """Exact extrinsic diameter of the fiber of |f| over a target point.

    ``y`` is either a euclidean point of the embedded target or a pair
    ``(cell, weights)`` in barycentric form.  Raises EmptyFiberError when
    the fiber is empty.
    """
    if isinstance(y, tuple) and len(y) == 2 and not np.isscalar(y[0]):
        cell, weights = y
        cell = tuple(cell)
        weights = np.asarray(weights, dtype=float)
    else:
        cell, weights = locate_in_complex(f.target, np.atleast_1d(np.asarray(y, float)))
    return FiberEnumerator(f).diameter(cell, weights)


def _interior_grid(cell: Simplex, resolution: int) -> list[np.ndarray]:
    """Interior barycentric grid of a cell: compositions of `resolution`
    into len(cell) positive parts, scaled to sum 1."""
    q = len(cell)
    if q == 1:
        return [np.array([1.0])]
    if resolution < q:
        return [np.full(q, 1.0 / q)]
    out = []
    for combo in itertools.combinations(range(1, resolution), q - 1):
        parts = np.diff((0,) + combo + (resolution,))
        out.append(parts / resolution)
    return out


@dataclass
class MapWidthReport:
    """Per-fiber diameters and their supremum for one map."""

    map_ref: str
    fiber_diameters: dict[str, float]
    W: float
    method: str
    delta: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fiber_diameters:
            mx = max(self.fiber_diameters.values())
            if abs(mx - self.W) > 1e-12:
                raise ValueError("W must equal the max recorded fiber diameter")
        if self.method == "sampled" and not (self.delta and self.delta > 0):
            raise ValueError("sampled reports need delta > 0")

    def to_json_dict(self) -> dict:
        return {
            "map": self.map_ref,
            "method": self.method,
            "delta": self.delta,
            "W": self.W,
            "fiber_diameters": {k: self.fiber_diameters[k]
                                for k in sorted(self.fiber_diameters)},
            "meta": {k: self.meta[k] for k in sorted(self.meta)},
        }


def map_width(f, interior_resolution: int = 16, delta: float = 1e-3,
              n_samples: int = 100_000, seed: int = 0) -> MapWidthReport:
    """Width W(f) = sup over fibers of the fiber diameter.

    Exact mode (SimplicialMap with embedded source): evaluates the exact
    fiber diameter at every target vertex and on an interior barycentric
    grid per positive-dimensional cell (``interior_resolution`` parts per
    barycentric direction); the evaluation set is recorded.  For maps that
    are affine on each cell the per-cell diameter is a max of convex
    functions of the target point, so the supremum over a closed cell is
    attained at its vertices; the grid documents this empirically.

    Sampled mode (PLMapSampled): bins ``n_samples`` domain samples by the
    delta-grid of their images and reports the max bin diameter.
    """
    if isinstance(f, SimplicialMap):
        enum = FiberEnumerator(f)
        fibers: dict[str, float] = {}
        evaluated = 0
        for cell in sorted(f.target.simplices):
            for w in _interior_grid(cell, interior_resolution if len(cell) > 1 else 1):
                evaluated += 1
                try:
                    d = enum.diameter(cell, w)
                except EmptyFiberError:
                    continue
                key = f"{cell}:" + ",".join(f"{x:.6f}" for x in w)
                fibers[key] = d
        W = max(fibers.values()) if fibers else 0.0
        return MapWidthReport(
            map_ref="simplicial", fiber_diameters=fibers, W=W, method="exact",
            meta={"interior_resolution": interior_resolution,
                  "fibers_evaluated": evaluated})
    if isinstance(f, PLMapSampled):
        rng = np.random.default_rng(seed)
        X = f.sample(rng, n_samples)
        Y = f.evaluate(X)
        perm, starts = kern.bin_indices(np.atleast_2d(Y.T).T, delta)
        diams = kern.group_diameters(X[perm], starts)
        W = float(diams.max()) if len(diams) else 0.0
        top = np.argsort(diams)[::-1][:16]
        fibers = {f"bin{int(i)}": float(diams[i]) for i in top}
        return MapWidthReport(
            map_ref="sampled-pl", fiber_diameters=fibers, W=W, method="sampled",
            delta=delta, meta={"n_samples": n_samples, "seed": seed,
                               "n_bins": len(diams)})
    raise TypeError(f"unsupported map type {type(f)!r}")


def graph_map_width(f: SimplicialMap) -> float:
    """Exact width of a simplicial map onto a graph.

    Fiber-piece vertices move affinely inside each open target cell, so
    pairwise distances are convex along it and the supremum over the cell
    is attained in the limit at its endpoints, i.e. at vertex fibers.
    """
    if f.target.dim > 1:
        raise ValueError("graph_map_width needs a target of dimension <= 1")
    enum = FiberEnumerator(f)
    best = 0.0
    for v in f.target.vertices:
        try:
            d = enum.diameter((v,), np.array([1.0]))
        except EmptyFiberError:
            continue
        best = max(best, d)
    return best


# -- covers -------------------------------------------------------------------


class Piece:
    """A cover piece: membership plus a continuous interior margin."""

    def margin(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.margin(points) > 0

    def diameter(self) -> Optional[float]:
        return None


@dataclass
class BoxPiece(Piece):
    lo: np.ndarray
    hi: np.ndarray

    def margin(self, points):
        P = np.atleast_2d(np.asarray(points, float))
        m = np.minimum(P - self.lo, self.hi - P).min(axis=1)
        return m

    def diameter(self):
        return float(np.linalg.norm(np.asarray(self.hi, float) - self.lo))


@dataclass
class BallPiece(Piece):
    center: np.ndarray
    radius: float

    def margin(self, points):
        P = np.atleast_2d(np.asarray(points, float))
        return self.radius - np.linalg.norm(P - self.center, axis=1)

    def diameter(self):
        return 2.0 * self.radius


@dataclass
class FuncPiece(Piece):
    margin_fn: Callable[[np.ndarray], np.ndarray]
    exact_diameter: Optional[float] = None

    def margin(self, points):
        return self.margin_fn(np.atleast_2d(np.asarray(points, float)))

    def diameter(self):
        return self.exact_diameter


@dataclass
class PullbackPiece(Piece):
    eval_fn: Callable[[np.ndarray], np.ndarray]
    base: Piece

    def margin(self, points):
        return self.base.margin(self.eval_fn(np.atleast_2d(np.asarray(points, float))))


@dataclass
class IntersectionPiece(Piece):
    parts: Sequence[Piece]

    def margin(self, points):
        ms = [p.margin(points) for p in self.parts]
        return np.minimum.reduce(ms)

    def diameter(self):
        ds = [p.diameter() for p in self.parts if p.diameter() is not None]
        return min(ds) if ds else None


@dataclass
class SampleSetPiece(Piece):
    """Piece given extensionally by carrier sample indices."""

    indices: np.ndarray
    label: str = ""

    def margin(self, points):
        raise NotImplementedError("sample-set pieces only support carrier queries")


class Cover:
    """A finite cover of a sampled carrier with verified-on-samples data."""

    def __init__(self, pieces: list[Piece], carrier: np.ndarray, is_open: bool,
                 declared_multiplicity: int, meta: Optional[dict] = None,
                 membership: Optional[np.ndarray] = None,
                 diameters: Optional[list[float]] = None):
        self.pieces = list(pieces)
        self.carrier = np.atleast_2d(np.asarray(carrier, float))
        self.is_open = is_open
        self.declared_multiplicity = declared_multiplicity
        self.meta = dict(meta or {})
        if membership is None:
            cols = []
            for p in self.pieces:
                if isinstance(p, SampleSetPiece):
                    col = np.zeros(len(self.carrier), dtype=bool)
                    col[p.indices] = True
                else:
                    col = p.contains(self.carrier)
                cols.append(col)
            membership = np.column_stack(cols) if cols else np.zeros((len(self.carrier), 0), bool)
        self.membership = membership
        if diameters is None:
            diameters = []
            for j, p in enumerate(self.pieces):
                d = p.diameter()
                if d is None:
                    pts = self.carrier[self.membership[:, j]]
                    d = float(kern.pairwise_diameter(pts)) if len(pts) else 0.0
                diameters.append(float(d))
        self.diameters = list(diameters)
        for j, p in enumerate(self.pieces):
            if not self.membership[:, j].any():
                raise CoverageError(f"piece {j} is empty on the carrier samples")

    @property
    def max_diameter(self) -> float:
        return max(self.diameters) if self.diameters else 0.0

    def multiplicity_on_samples(self) -> int:
        return int(self.membership.sum(axis=1).max()) if len(self.carrier) else 0

    def coverage_gap(self):
        hit = self.membership.any(axis=1)
        if hit.all():
            return None
        return self.carrier[int(np.flatnonzero(~hit)[0])]

    def verify(self):
        gap = self.coverage_gap()
        if gap is not None:
            raise CoverageError("cover misses a carrier sample", witness=gap)
        mult = self.multiplicity_on_samples()
        if mult > self.declared_multiplicity:
            idx = int(np.flatnonzero(self.membership.sum(axis=1) > self.declared_multiplicity)[0])
            raise MultiplicityError(
                f"multiplicity {mult} exceeds declared {self.declared_multiplicity}",
                witness=self.carrier[idx])
        return {"multiplicity": mult, "max_diameter": self.max_diameter,
                "samples": len(self.carrier)}


def nerve_map_from_cover(cover: Cover):
    """Nerve complex plus the partition-of-unity map into it.

    Weights are normalized clipped margins (distance-to-complement style),
    so a point's image lies in the nerve simplex spanned by the pieces
    containing it; the map width is therefore at most the max piece
    diameter, and this pull-back containment is certified per sample.
    """
    if not cover.is_open:
        raise ValueError("nerve maps need an open cover")
    stats = cover.verify()
    margins = np.column_stack([p.margin(cover.carrier) for p in cover.pieces])
    supports = margins > 0
    simplices = {tuple(np.flatnonzero(row)) for row in supports}
    simplices |= {(j,) for j in range(len(cover.pieces))}
    nerve = SimplicialComplex(simplices)

    def evaluate(points):
        M = np.column_stack([p.margin(points) for p in cover.pieces])
        M = np.clip(M, 0.0, None)
        s = M.sum(axis=1, keepdims=True)
        if (s <= 0).any():
            raise CoverageError("point outside every piece",
                                witness=np.atleast_2d(points)[int(np.flatnonzero(s[:, 0] <= 0)[0])])
        return M / s

    nerve_map = PLMapSampled(
        sample=lambda rng, k: cover.carrier[rng.integers(0, len(cover.carrier), k)],
        evaluate=evaluate,
        target_dim=nerve.dim,
        meta={"kind": "nerve", "pieces": len(cover.pieces)})
    cert = {
        "nerve_dim": nerve.dim,
        "multiplicity": stats["multiplicity"],
        "width_bound": cover.max_diameter,
        "samples": stats["samples"],
        "support_in_membership": bool((supports <= cover.membership).all()),
    }
    return nerve, nerve_map, cert


def _sample_realization(K: SimplicialComplex, n: int, rng) -> np.ndarray:
    """Quasi-uniform samples of the realization: per maximal simplex weighted
    by its dimensional volume proxy, Dirichlet barycentric draws."""
    tops = K.maximal_simplices()
    vols = []
    for s in tops:
        P = K.points(s)
        E = P[1:] - P[0]
        if len(s) == 1:
            vols.append(1e-12)
        else:
            g = E @ E.T
            vols.append(float(np.sqrt(max(np.linalg.det(g), 0.0))) + 1e-12)
    w = np.array(vols) / sum(vols)
    counts = rng.multinomial(n, w)
    chunks = []
    for s, c in zip(tops, counts):
        if c == 0:
            continue
        lam = rng.dirichlet(np.ones(len(s)), size=c)
        chunks.append(lam @ K.points(s))
    return np.vstack(chunks) if chunks else np.zeros((0, K.embed_dim))


def _descend_blocks(weights: np.ndarray, labels: list, depth: int, tol: float = 1e-12):
    """Iterated-barycentric block labels of maximal weight for a point given
    in barycentric coordinates of a cell with the given vertex labels."""
    t = np.asarray(weights, float)
    for _ in range(depth):
        order = np.argsort(-t, kind="stable")
        ts = t[order]
        q = len(t)
        mu = np.empty(q)
        for j in range(q):
            nxt = ts[j + 1] if j + 1 < q else 0.0
            mu[j] = (j + 1) * (ts[j] - nxt)
        keep = mu > tol
        new_labels = []
        prefix: list = []
        for j in range(q):
            prefix = sorted(prefix + [labels[order[j]]], key=repr)
            if keep[j]:
                new_labels.append(tuple(prefix))
        t = mu[keep]
        t = t / t.sum()
        labels = new_labels
    mx = t.max()
    return [lab for lab, w in zip(labels, t) if w >= mx - tol]


def cover_from_map(p: SimplicialMap, eps: float, n_samples: int = 10_000,
                   seed: int = 0, max_depth: int = 12,
                   interior_resolution: int = 8) -> Cover:
    """Closed cover of the source by fiber blocks of diameter <= W(p) + eps.

    The target is covered by the closed dual blocks of its k-th barycentric
    subdivision (multiplicity <= dim+1); pieces are preimages of the blocks,
    realized as carrier-sample index sets, with k increased until every
    sampled piece diameter is within W(p) + eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    W = map_width(p, interior_resolution=interior_resolution).W
    rng = np.random.default_rng(seed)
    X = _sample_realization(p.source, n_samples, rng)
    # barycentric image data per sample
    enumr = FiberEnumerator(p)
    cells = []
    weights = []
    tops = p.source.maximal_simplices()
    vols = []
    for s in tops:
        P = p.source.points(s)
        E = P[1:] - P[0]
        vols.append((np.sqrt(max(np.linalg.det(E @ E.T), 0.0)) if len(s) > 1 else 0.0) + 1e-12)
    wv = np.array(vols) / sum(vols)
    counts = rng.multinomial(n_samples, wv)
    X_list = []
    img_cells = []
    img_weights = []
    for s, c in zip(tops, counts):
        if c == 0:
            continue
        lam = rng.dirichlet(np.ones(len(s)), size=c)
        X_list.append(lam @ p.source.points(s))
        groups: dict[int, list[int]] = {}
        for idx, v in enumerate(s):
            groups.setdefault(p.vertex_map[v], []).append(idx)
        tgt_vs = sorted(groups)
        T = np.zeros((c, len(tgt_vs)))
        for j, w in enumerate(tgt_vs):
            T[:, j] = lam[:, groups[w]].sum(axis=1)
        for r in range(c):
            img_cells.append(tgt_vs)
            img_weights.append(T[r])
    X = np.vstack(X_list)

    d = p.target.dim
    for depth in range(max_depth + 1):
        piece_samples: dict = {}
        for i in range(len(X)):
            labs = _descend_blocks(img_weights[i], list(img_cells[i]), depth)
            for lab in labs:
                piece_samples.setdefault(lab, []).append(i)
        pieces = []
        diams = []
        for lab in sorted(piece_samples, key=repr):
            idx = np.array(piece_samples[lab], dtype=int)
            pieces.append(SampleSetPiece(indices=idx, label=repr(lab)))
            diams.append(float(kern.pairwise_diameter(X[idx])))
        if max(diams) <= W + eps or depth == max_depth:
            if max(diams) > W + eps:
                raise CoverageError(
                    f"could not reach diameter W+eps={W + eps:.6g} within "
                    f"{max_depth} subdivisions (best {max(diams):.6g})")
            cover = Cover(pieces, X, is_open=False, declared_multiplicity=d + 1,
                          meta={"depth": depth, "seed": seed, "W": W, "eps": eps,
                                "n_samples": n_samples},
                          diameters=diams)
            cover.verify()
            return cover
    raise AssertionError("unreachable")


def compose_covers(f_eval: Callable[[np.ndarray], np.ndarray], cover_y: Cover,
                   per_piece_covers: Sequence[Sequence[Piece]],
                   carrier_x: np.ndarray,
                   per_piece_multiplicity: int) -> Cover:
    """Compose a target cover with per-piece covers of the preimages.

    Output pieces are pullback(f, Y_i) intersected with the members of the
    i-th per-piece cover; the multiplicity bound is the product
    (m+1)(d+1) of the declared bounds, verified on the carrier samples.
    """
    carrier_x = np.atleast_2d(np.asarray(carrier_x, float))
    fx = f_eval(carrier_x)
    pieces: list[Piece] = []
    diameters: list[float] = []
    cols = []
    for i, ypiece in enumerate(cover_y.pieces):
        in_y = ypiece.contains(fx)
        covered = np.zeros(len(carrier_x), dtype=bool)
        for sub in per_piece_covers[i]:
            piece = IntersectionPiece([PullbackPiece(f_eval, ypiece), sub])
            col = in_y & sub.contains(carrier_x)
            pieces.append(piece)
            d = sub.diameter()
            if d is None:
                pts = carrier_x[col]
                d = float(kern.pairwise_diameter(pts)) if len(pts) else 0.0
            diameters.append(float(d))
            cols.append(col)
            covered |= col
        bad = in_y & ~covered
        if bad.any():
            raise CoverageError(
                f"per-piece cover {i} misses part of the preimage",
                witness=carrier_x[int(np.flatnonzero(bad)[0])])
    membership = np.column_stack(cols)
    keep = [j for j in range(len(pieces)) if membership[:, j].any()]
    membership = membership[:, keep]
    pieces = [pieces[j] for j in keep]
    diameters = [diameters[j] for j in keep]
    declared = cover_y.declared_multiplicity * per_piece_multiplicity
    cover = Cover(pieces, carrier_x, is_open=cover_y.is_open,
                  declared_multiplicity=declared,
                  meta={"composed_from": len(cover_y.pieces)},
                  membership=membership, diameters=diameters)
    cover.verify()
    return cover


# -- semicontinuity probe ------------------------------------------------------


@dataclass
class SemicontinuityReport:
    base_value: float
    probe_values: list[float]
    limsup_estimate: float
    tolerance: float
    passed: bool

    def to_json_dict(self):
        return {
            "base_value": self.base_value,
            "probe_values": self.probe_values,
            "limsup_estimate": self.limsup_estimate,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def semicontinuity_probe(bound_fn: Callable, y, offsets: Iterable,
                         tolerance: float) -> SemicontinuityReport:
    """Check upper semicontinuity of a fiber width bound at y (report only).

    ``offsets`` is a sequence of displacements approaching 0; the limsup is
    estimated from the closest half of the probes.
    """
    y = np.asarray(y, float)
    offs = [np.asarray(o, float) for o in offsets]
    offs.sort(key=lambda o: -float(np.linalg.norm(o)))
    values = [float(bound_fn(y + o)) for o in offs]
    base = float(bound_fn(y))
    tail = values[len(values) // 2:] if values else []
    limsup = max(tail) if tail else float("-inf")
    return SemicontinuityReport(
        base_value=base, probe_values=values, limsup_estimate=limsup,
        tolerance=tolerance, passed=bool(base >= limsup - tolerance))


# -- certificates ---------------------------------------------------------------


def _hash_inputs(obj) -> str:
    text = json.dumps(obj, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class WidthCertificate:
    """Common schema for width/witness certificates emitted by all modules."""

    kind: str
    inputs: dict
    method: str
    W: float
    fiber_table: dict[str, float] = field(default_factory=dict)
    delta: Optional[float] = None
    seed: Optional[int] = None
    sample_count: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "inputs_hash": _hash_inputs(self.inputs),
            "inputs": {k: self.inputs[k] for k in sorted(self.inputs)},
            "method": self.method,
            "exact": self.delta is None,
            "delta": self.delta,
            "W": self.W,
            "fiber_table": {k: self.fiber_table[k] for k in sorted(self.fiber_table)},
            "seed": self.seed,
            "sample_count": self.sample_count,
            "extra": {k: self.extra[k] for k in sorted(self.extra)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Deterministic CSV emitter for width-vs-parameter series."""
    import csv
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])


def cover_from_nerve_map(nerve_map: PLMapSampled, carrier: np.ndarray,
                         d: int, eps: float, ref_diameter: float,
                         max_depth: int = 12) -> Cover:
    """Closed cover of the carrier pulled back through a nerve map.

    The nerve map evaluates to barycentric weight vectors over the nerve
    vertices; pieces are preimages of the dual blocks of the iterated
    subdivision of the weight simplexes.  At subdivision depth >= 1 every
    block preimage sits inside one original cover piece (the block is
    contained in the closed star of each vertex of its carrier cell, whose
    preimage is where that piece's weight is positive), so the max piece
    diameter is at most ref_diameter + eps once sampled diameters settle.
    """
    carrier = np.atleast_2d(np.asarray(carrier, float))
    Wgt = nerve_map.evaluate(carrier)
    for depth in range(1, max_depth + 1):
        piece_samples: dict = {}
        for idx in range(len(carrier)):
            w = Wgt[idx]
            support = np.flatnonzero(w > 1e-12)
            labs = _descend_blocks(w[support], [int(v) for v in support], depth)
            for lab in labs:
                piece_samples.setdefault(lab, []).append(idx)
        pieces, diams = [], []
        for lab in sorted(piece_samples, key=repr):
            members = np.array(piece_samples[lab], dtype=int)
            pieces.append(SampleSetPiece(indices=members, label=repr(lab)))
            diams.append(float(kern.pairwise_diameter(carrier[members])))
        if max(diams) <= ref_diameter + eps:
            cover = Cover(pieces, carrier, is_open=False,
                          declared_multiplicity=d + 1,
                          meta={"depth": depth, "eps": eps,
                                "ref_diameter": ref_diameter},
                          diameters=diams)
            cover.verify()
            return cover
    raise CoverageError(
        f"nerve-map cover did not reach {ref_diameter + eps:.6g} within "
        f"{max_depth} subdivisions")
