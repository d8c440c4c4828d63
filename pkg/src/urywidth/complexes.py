"""Finite simplicial complexes, simplicial maps, homology ranks, and the
connected (Reeb-style) factorization of a simplicial map.

Conventions used throughout the package:

* vertex ids are integers; the canonical form of a simplex is the sorted
  tuple of its vertex ids;
* a complex stores the full face closure, so membership tests are set
  lookups;
* optional euclidean embeddings assign every vertex a coordinate vector of
  one common dimension.  Embeddings drive metric computations only; all
  topology (components, homology) is combinatorial.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from ._intlinalg import integer_rank, kernel_basis, smith_diagonal

Simplex = tuple[int, ...]


def _canon(simplex: Iterable[int]) -> Simplex:
    s = tuple(sorted(int(v) for v in simplex))
    if len(set(s)) != len(s):
        raise ValueError(f"simplex with repeated vertices: {s}")
    return s


def faces_of(simplex: Simplex) -> list[Simplex]:
    """All nonempty proper and improper faces of a simplex."""
    out = []
    for k in range(1, len(simplex) + 1):
        out.extend(itertools.combinations(simplex, k))
    return out


class SimplicialComplex:
    """Finite simplicial complex, face-closed, with optional embedding."""

    def __init__(self, simplices: Iterable[Iterable[int]],
                 coords: Optional[dict[int, np.ndarray]] = None):
        closure: set[Simplex] = set()
        for s in simplices:
            cs = _canon(s)
            for f in faces_of(cs):
                closure.add(f)
        self.simplices: frozenset[Simplex] = frozenset(closure)
        self.vertices: tuple[int, ...] = tuple(sorted({s[0] for s in closure if len(s) == 1}))
        self.coords: Optional[dict[int, np.ndarray]] = None
        if coords is not None:
            dims = {len(np.atleast_1d(c)) for c in coords.values()}
            if len(dims) > 1:
                raise ValueError("embedding dimensions disagree")
            missing = [v for v in self.vertices if v not in coords]
            if missing:
                raise ValueError(f"embedding missing vertices {missing[:4]}")
            self.coords = {int(v): np.asarray(coords[v], dtype=float) for v in self.vertices}
        self._maximal: Optional[tuple[Simplex, ...]] = None

    # -- basic structure ---------------------------------------------------

    @property
    def dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    @property
    def embed_dim(self) -> Optional[int]:
        if not self.coords:
            return None
        return len(next(iter(self.coords.values())))

    def maximal_simplices(self) -> tuple[Simplex, ...]:
        if self._maximal is None:
            by_size = sorted(self.simplices, key=len, reverse=True)
            maximal: list[Simplex] = []
            seen: set[Simplex] = set()
            for s in by_size:
                if s not in seen:
                    maximal.append(s)
                    for f in faces_of(s):
                        seen.add(f)
            self._maximal = tuple(sorted(maximal))
        return self._maximal

    def k_simplices(self, k: int) -> list[Simplex]:
        return sorted(s for s in self.simplices if len(s) == k + 1)

    def point(self, v: int) -> np.ndarray:
        if self.coords is None:
            raise ValueError("complex has no embedding")
        return self.coords[v]

    def points(self, vs: Iterable[int]) -> np.ndarray:
        return np.array([self.point(v) for v in vs])

    def barycenter(self, simplex: Simplex) -> np.ndarray:
        return self.points(simplex).mean(axis=0)

    def has_simplex(self, simplex: Iterable[int]) -> bool:
        return _canon(simplex) in self.simplices

    def subcomplex(self, keep: Iterable[Simplex]) -> "SimplicialComplex":
        keep = list(keep)
        coords = None
        if self.coords is not None:
            vs = {v for s in keep for v in s}
            coords = {v: self.coords[v] for v in vs}
        return SimplicialComplex(keep, coords)

    def is_face_closed(self) -> bool:
        return all(f in self.simplices for s in self.simplices for f in faces_of(s))

    def vertex_components(self) -> list[set[int]]:
        parent = {v: v for v in self.vertices}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for s in self.simplices:
            if len(s) == 2:
                ra, rb = find(s[0]), find(s[1])
                if ra != rb:
                    parent[rb] = ra
        groups: dict[int, set[int]] = {}
        for v in self.vertices:
            groups.setdefault(find(v), set()).add(v)
        return sorted(groups.values(), key=min)

    def __repr__(self):
        return (f"SimplicialComplex(|V|={len(self.vertices)}, "
                f"|S|={len(self.simplices)}, dim={self.dim})")

    def __eq__(self, other):
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        if self.simplices != other.simplices:
            return False
        if (self.coords is None) != (other.coords is None):
            return False
        if self.coords is not None:
            return all(np.array_equal(self.coords[v], other.coords[v]) for v in self.vertices)
        return True

    def __hash__(self):
        return hash(self.simplices)

    # -- serialization (deterministic) ------------------------------------

    def to_json_dict(self) -> dict:
        verts = []
        for v in self.vertices:
            entry: dict = {"id": int(v)}
            if self.coords is not None:
                entry["coords"] = [float(c) for c in self.coords[v]]
            verts.append(entry)
        return {
            "vertices": verts,
            "simplices": [list(map(int, s)) for s in sorted(self.simplices)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "SimplicialComplex":
        coords = None
        if any("coords" in v for v in data["vertices"]):
            coords = {int(v["id"]): np.asarray(v["coords"], float) for v in data["vertices"]}
        simplices = [tuple(s) for s in data["simplices"]]
        simplices += [(int(v["id"]),) for v in data["vertices"]]
        return cls(simplices, coords)

    @classmethod
    def from_json(cls, text: str) -> "SimplicialComplex":
        return cls.from_json_dict(json.loads(text))


# -- boundary matrices and homology ---------------------------------------


def boundary_matrix(K: SimplicialComplex, k: int) -> list[list[int]]:
    """Integer matrix of the boundary map C_k -> C_{k-1} in sorted bases."""
    rows = K.k_simplices(k - 1)
    cols = K.k_simplices(k)
    row_index = {s: i for i, s in enumerate(rows)}
    mat = [[0] * len(cols) for _ in rows]
    for j, s in enumerate(cols):
        for drop in range(len(s)):
            face = s[:drop] + s[drop + 1:]
            mat[row_index[face]][j] = (-1) ** drop
    return mat


def h1_rank(K: SimplicialComplex) -> int:
    """Free rank of the first integral homology group.

    Computed from Smith normal forms of the boundary matrices d1 and d2;
    torsion is discarded.
    """
    edges = K.k_simplices(1)
    if not edges:
        return 0
    d1 = boundary_matrix(K, 1)
    rank_d1 = len(smith_diagonal(d1)) if d1 and d1[0] else 0
    tris = K.k_simplices(2)
    rank_d2 = 0
    if tris:
        d2 = boundary_matrix(K, 2)
        rank_d2 = len(smith_diagonal(d2))
    return len(edges) - rank_d1 - rank_d2


def h0_rank(K: SimplicialComplex) -> int:
    return len(K.vertex_components())


# -- barycentric subdivision -----------------------------------------------


def _barycentric_with_origins(K: SimplicialComplex):
    """Subdivision together with the map new-vertex-id -> original simplex."""
    cells = sorted(K.simplices, key=lambda s: (len(s), s))
    new_id = {s: i for i, s in enumerate(cells)}
    chains: set[Simplex] = set()

    def extend(chain: tuple[Simplex, ...]):
        chains.add(tuple(sorted(new_id[c] for c in chain)))
        top = chain[-1]
        for s in K.simplices:
            if len(s) > len(top) and set(top) < set(s):
                extend(chain + (s,))

    for s in cells:
        if len(s) == 1:
            extend((s,))
    coords = None
    if K.coords is not None:
        coords = {new_id[s]: K.barycenter(s) for s in cells}
    return SimplicialComplex(chains, coords), {new_id[s]: s for s in cells}


def barycentric_subdivide(K: SimplicialComplex) -> SimplicialComplex:
    """Barycentric subdivision; realization is setwise identical to K's."""
    return _barycentric_with_origins(K)[0]


# -- simplicial maps --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimplicialMap:
    """Vertex map between complexes sending simplices to simplices."""

    source: SimplicialComplex
    target: SimplicialComplex
    vertex_map: dict[int, int]

    def __post_init__(self):
        missing = [v for v in self.source.vertices if v not in self.vertex_map]
        if missing:
            raise ValueError(f"vertex map not total, missing {missing[:4]}")
        for s in self.source.maximal_simplices():
            img = self.image_simplex(s)
            if img not in self.target.simplices:
                raise ValueError(f"map is not simplicial on {s} (image {img})")

    def image_simplex(self, s: Simplex) -> Simplex:
        return tuple(sorted({self.vertex_map[v] for v in s}))

    def __call__(self, v: int) -> int:
        return self.vertex_map[v]

    def compose(self, other: "SimplicialMap") -> "SimplicialMap":
        """self after other (other.source -> self.target)."""
        vm = {v: self.vertex_map[other.vertex_map[v]] for v in other.source.vertices}
        return SimplicialMap(other.source, self.target, vm)

    def is_surjective(self) -> bool:
        images = {self.image_simplex(s) for s in self.source.simplices}
        closure = set()
        for img in images:
            closure.update(faces_of(img))
        return closure >= self.target.simplices

    def to_json_dict(self) -> dict:
        return {"vertex_map": {str(k): int(self.vertex_map[k])
                               for k in sorted(self.vertex_map)}}


@dataclass
class PLMapSampled:
    """Numerical carrier for a PL map given by point evaluation.

    ``sample(rng, n)`` draws domain points, ``evaluate(points)`` maps an
    (n, d) array to an (n, m) array.  Evaluation must be deterministic.
    """

    sample: Callable[[np.random.Generator, int], np.ndarray]
    evaluate: Callable[[np.ndarray], np.ndarray]
    target_dim: int
    meta: dict = field(default_factory=dict)


# -- graphs -----------------------------------------------------------------


class Graph:
    """Simplicial complex of dimension <= 1 with strictly positive edge lengths."""

    def __init__(self, complex_: SimplicialComplex,
                 lengths: Optional[dict[Simplex, float]] = None):
        if complex_.dim > 1:
            raise ValueError("graph must have dimension <= 1")
        self.complex = complex_
        self.edges: list[Simplex] = complex_.k_simplices(1)
        if lengths is None:
            lengths = {}
            for e in self.edges:
                if complex_.coords is not None:
                    L = float(np.linalg.norm(complex_.point(e[1]) - complex_.point(e[0])))
                    lengths[e] = L if L > 0 else 1.0
                else:
                    lengths[e] = 1.0
        self.lengths = {_canon(e): float(lengths[_canon(e)]) for e in self.edges}
        if any(L <= 0 for L in self.lengths.values()):
            raise ValueError("edge lengths must be strictly positive")

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.complex.vertices

    def neighbors(self, v: int):
        for e in self.edges:
            if v == e[0]:
                yield e[1], self.lengths[e]
            elif v == e[1]:
                yield e[0], self.lengths[e]

    def vertex_distances(self, source: int) -> dict[int, float]:
        """Dijkstra distances from a vertex to all vertices (inf if unreachable)."""
        import heapq
        dist = {v: float("inf") for v in self.vertices}
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for w, L in self.neighbors(v):
                nd = d + L
                if nd < dist[w]:
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        return dist

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        comps = self.complex.vertex_components()
        return len(comps) == 1

    def nx(self):
        import networkx as nx
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        for e in self.edges:
            g.add_edge(*e, length=self.lengths[e])
        return g


# -- connected (Reeb-style) factorization -----------------------------------


class ReebStructure:
    """Cell-level data of the connected factorization of a simplicial map.

    A cell of the factored target is a pair (target cell W, component k),
    where components group the source simplices with image containing W by
    shared faces whose image also contains W.
    """

    def __init__(self, f: SimplicialMap):
        self.map = f
        src = f.source
        tgt = f.target
        self.image_of: dict[Simplex, Simplex] = {s: f.image_simplex(s) for s in src.simplices}
        target_cells = sorted(tgt.simplices)
        self.cells: list[tuple[Simplex, int]] = []
        self.cell_index: dict[tuple[Simplex, int], int] = {}
        # component id of each source simplex over each target cell it covers
        self._comp: dict[tuple[Simplex, Simplex], int] = {}
        self.members: dict[int, list[Simplex]] = {}
        self.empty_cells: list[Simplex] = []
        for W in target_cells:
            Wset = set(W)
            mem = [s for s in src.simplices if Wset <= set(self.image_of[s])]
            if not mem:
                self.empty_cells.append(W)
                continue
            parent = {s: s for s in mem}

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            memset = set(mem)
            for s in mem:
                if len(s) > 1:
                    for drop in range(len(s)):
                        face = s[:drop] + s[drop + 1:]
                        if face in memset:
                            ra, rb = find(s), find(face)
                            if ra != rb:
                                parent[rb] = ra
            reps: dict[Simplex, int] = {}
            groups: dict[Simplex, list[Simplex]] = {}
            for s in mem:
                groups.setdefault(find(s), []).append(s)
            for rep in sorted(groups, key=min):
                cid = len(self.cells)
                reps[rep] = cid
                self.cells.append((W, len(reps) - 1))
                self.cell_index[(W, len(reps) - 1)] = cid
                self.members[cid] = sorted(groups[rep])
            for s in mem:
                self._comp[(s, W)] = reps[find(s)]

    def cell_of(self, s: Simplex) -> int:
        """Factored cell carrying the open simplex s."""
        return self._comp[(s, self.image_of[s])]

    def cell_over(self, s: Simplex, W: Simplex) -> int:
        return self._comp[(s, W)]

    def restrict(self, cid: int, W_face: Simplex) -> int:
        """Face of a factored cell over a face of its target cell."""
        member = self.members[cid][0]
        return self._comp[(member, W_face)]

    def cell_faces(self, cid: int) -> list[int]:
        W, _ = self.cells[cid]
        out = []
        for Wf in faces_of(W):
            out.append(self.restrict(cid, Wf))
        return sorted(set(out))

    def n_components_over(self, W: Simplex) -> int:
        return sum(1 for (cw, _k) in self.cells if cw == W)


def check_map_connected(f: SimplicialMap):
    """Whether every fiber of |f| is nonempty and path-connected.

    Returns ``(ok, witness)``; the witness names a target cell whose open
    part has an empty or disconnected fiber, with the component count.
    """
    rs = ReebStructure(f)
    if rs.empty_cells:
        W = rs.empty_cells[0]
        return False, {"cell": W, "components": 0, "reason": "empty fiber"}
    counts: dict[Simplex, int] = {}
    for (W, _k) in rs.cells:
        counts[W] = counts.get(W, 0) + 1
    for W in sorted(counts):
        if counts[W] > 1:
            return False, {"cell": W, "components": counts[W],
                           "reason": "disconnected fiber"}
    return True, None


def connected_factorization(f: SimplicialMap):
    """Factor f through the space of fiber components (Reeb construction).

    Returns ``(f_tilde, Y_tilde, q)`` where ``f_tilde`` is a simplicial map
    from the barycentric subdivision of the source onto ``Y_tilde`` (the
    chain complex on factored cells), and ``q`` maps ``Y_tilde`` to the
    barycentric subdivision of the target.  ``q o f_tilde`` equals the
    subdivided f, which realizes the original map up to the canonical
    identification of realizations.  Every fiber of ``f_tilde`` is nonempty
    and path-connected.
    """
    rs = ReebStructure(f)
    src = f.source
    tgt = f.target

    # Y_tilde: vertices are factored cells, simplices are chains in the
    # face partial order (the subdivision of the factored cell complex;
    # plain simplices cannot host parallel cells).
    n_cells = len(rs.cells)
    lt: dict[int, list[int]] = {c: [] for c in range(n_cells)}
    for cid in range(n_cells):
        lt[cid] = [fid for fid in rs.cell_faces(cid) if fid != cid]
    chains: set[Simplex] = set()

    def grow(chain: tuple[int, ...]):
        chains.add(tuple(sorted(chain)))
        top = chain[-1]
        for cid in range(n_cells):
            if top in lt[cid] and cid not in chain:
                grow(chain + (cid,))

    minimal = [c for c in range(n_cells) if not lt[c]]
    for c in minimal:
        grow((c,))
    for c in range(n_cells):
        chains.add((c,))
    coords = None
    if tgt.coords is not None:
        coords = {cid: tgt.barycenter(W) for cid, (W, _k) in enumerate(rs.cells)}
    y_tilde = SimplicialComplex(chains, coords)

    sd_src, origin_src = _barycentric_with_origins(src)
    sd_tgt, origin_tgt = _barycentric_with_origins(tgt)
    tgt_vertex_of = {W: vid for vid, W in origin_tgt.items()}

    f_tilde_vm = {vid: rs.cell_of(origin_src[vid]) for vid in sd_src.vertices}
    q_vm = {cid: tgt_vertex_of[W] for cid, (W, _k) in enumerate(rs.cells)}
    f_tilde = SimplicialMap(sd_src, y_tilde, f_tilde_vm)
    q = SimplicialMap(y_tilde, sd_tgt, q_vm)
    return f_tilde, y_tilde, q


def subdivided_map(f: SimplicialMap) -> SimplicialMap:
    """Barycentric subdivision of a simplicial map (sends barycenters to
    barycenters of image simplices)."""
    sd_src, origin_src = _barycentric_with_origins(f.source)
    sd_tgt, origin_tgt = _barycentric_with_origins(f.target)
    tgt_vertex_of = {W: vid for vid, W in origin_tgt.items()}
    vm = {vid: tgt_vertex_of[f.image_simplex(origin_src[vid])] for vid in sd_src.vertices}
    return SimplicialMap(sd_src, sd_tgt, vm)


def h1_onto_check(f: SimplicialMap) -> bool:
    """Whether the induced map on first homology is surjective.

    Rank test over the rationals: the image of the source cycle space
    together with the target boundary space must span the target cycle
    space.  The map must have connected fibers (checked; rejected if not).
    """
    ok, witness = check_map_connected(f)
    if not ok:
        raise ValueError(f"h1_onto_check requires a connected map, got {witness}")
    tgt_edges = f.target.k_simplices(1)
    if not tgt_edges:
        return True
    col_index = {e: i for i, e in enumerate(tgt_edges)}
    d1_t = boundary_matrix(f.target, 1)
    rank_d1_t = integer_rank(d1_t)
    z1_t_dim = len(tgt_edges) - rank_d1_t
    if z1_t_dim == 0:
        return True

    src_edges = f.source.k_simplices(1)
    d1_s = boundary_matrix(f.source, 1)
    z1_s = kernel_basis(d1_s) if src_edges else []

    cols: list[list[int]] = []
    for vec in z1_s:
        col = [0] * len(tgt_edges)
        for val, e in zip(vec, src_edges):
            if not val:
                continue
            a, b = f.vertex_map[e[0]], f.vertex_map[e[1]]
            if a == b:
                continue
            if a < b:
                col[col_index[(a, b)]] += val
            else:
                col[col_index[(b, a)]] -= val
        cols.append(col)
    tris = f.target.k_simplices(2)
    if tris:
        d2_t = boundary_matrix(f.target, 2)
        for j in range(len(tris)):
            cols.append([d2_t[i][j] for i in range(len(tgt_edges))])
    if not cols:
        return False
    mat = [list(row) for row in zip(*cols)]
    return integer_rank(mat) == z1_t_dim
