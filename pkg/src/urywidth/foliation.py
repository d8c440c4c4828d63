"""Graph-valued foliations of an embedded surface and their interpolation.

A foliation here is a surjective simplicial map with connected fibers from
an embedded complex of dimension <= 2 onto a graph.  Interpolation between
two foliations sweeps a filtration of the second target graph: at parameter
t the space splits into the closed sublevel part (foliated by the second
map) and the closed complement (foliated by the connected factorization of
the first map restricted there); leaves touching along the moving front are
merged by the transitive closure of fiber intersection.  All fiber widths
are exact: fibers of simplicial maps to graphs are unions of convex
polytopes whose diameters sit on enumerable vertices.

Everything runs on a common refinement of the source triangulation, so the
merge relation is combinatorial (front matching uses a 1e-9 parameter
tolerance); events are the filtration values of target nodes and of source
vertices, evaluated together with interval midpoints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as kern
from ._cutting import (SNAP, MapTarget, TrackedComplex, make_pos, node_pos,
                       pos_param, simplex_image_edge)
from .complexes import (Graph, SimplicialComplex, SimplicialMap,
                        check_map_connected, connected_factorization, h1_rank)
from .width import FiberEnumerator, WidthCertificate, graph_map_width


class FoliationError(ValueError):
    pass


class WidthBoundViolation(AssertionError):
    """Raised when a certified interpolation width bound fails: this would
    falsify the implementation, not the underlying statement."""


# -- foliations -----------------------------------------------------------------


@dataclass
class Foliation:
    """Simple foliation: surjective connected simplicial map onto a graph,
    with its exact width cached."""

    sigma: SimplicialComplex
    leaf_graph: Graph
    map: SimplicialMap
    width: float
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(cls, sigma: SimplicialComplex, leaf_graph: Graph,
              vertex_map: dict[int, int], meta: Optional[dict] = None) -> "Foliation":
        f = SimplicialMap(sigma, leaf_graph.complex, vertex_map)
        ok, witness = check_map_connected(f)
        if not ok:
            raise FoliationError(f"not a simple foliation: {witness}")
        if not f.is_surjective():
            raise FoliationError("foliation map must be surjective")
        return cls(sigma=sigma, leaf_graph=leaf_graph, map=f,
                   width=graph_map_width(f), meta=dict(meta or {}))

    def rescaled(self, scale: float) -> "Foliation":
        coords = {v: self.sigma.coords[v] * scale for v in self.sigma.vertices}
        sigma = SimplicialComplex(self.sigma.simplices, coords)
        return Foliation(sigma=sigma, leaf_graph=self.leaf_graph,
                         map=SimplicialMap(sigma, self.leaf_graph.complex,
                                           self.map.vertex_map),
                         width=self.width * scale,
                         meta={**self.meta, "rescaled_by": scale})

    def to_json_dict(self) -> dict:
        return {
            "sigma": self.sigma.to_json_dict(),
            "leaf_graph": self.leaf_graph.complex.to_json_dict(),
            "vertex_map": self.map.to_json_dict()["vertex_map"],
            "width": self.width,
        }


def make_simple(p: SimplicialMap, bound: float, max_depth: int = 12) -> Foliation:
    """Turn a simplicial map of width below `bound` into a simple foliation
    of width below `bound`.

    The target graph is subdivided until every vertex star has a preimage of
    diameter below the bound; the map is then simplicial for the induced
    source refinement without moving any image (the approximation step is
    the identity on realizations), and the connected factorization makes the
    fibers connected.  Fails if the star condition is unreachable within
    `max_depth` subdivision rounds.
    """
    if p.target.dim > 1:
        raise FoliationError("foliations map to graphs (target dim <= 1)")
    W = graph_map_width(p)
    if W >= bound:
        raise FoliationError(
            f"cannot simplify at this bound: width {W} >= bound {bound}")
    src = p.source
    enum = FiberEnumerator(p)
    base_lengths = {e: 1.0 for e in p.target.k_simplices(1)}

    def star_diameters(depth: int) -> float:
        # vertices of the depth-times split graph sit at params j / 2^depth
        worst = 0.0
        step = 0.5 ** depth
        for e in p.target.k_simplices(1):
            grid = np.arange(0.0, 1.0 + step / 2, step)
            for c in grid:
                lo, hi = max(0.0, c - step), min(1.0, c + step)
                pts = _edge_window_coords(p, enum, e, lo, hi)
                if len(pts):
                    worst = max(worst, float(kern.pairwise_diameter(pts)))
        for v in p.target.vertices:
            pts = [enum.fiber_vertices((v,), np.array([1.0]))]
            for e in p.target.k_simplices(1):
                if v in e:
                    lo, hi = (0.0, step) if e[0] == v else (1.0 - step, 1.0)
                    w = _edge_window_coords(p, enum, e, lo, hi)
                    if len(w):
                        pts.append(w)
            worst = max(worst, float(kern.pairwise_diameter(np.vstack(pts))))
        return worst

    depth = 0
    while True:
        worst = star_diameters(depth)
        if worst < bound:
            break
        depth += 1
        if depth > max_depth:
            raise FoliationError(
                f"cannot simplify at this bound: star preimage diameter "
                f"{worst} after {max_depth} subdivisions")
    f_tilde, y_tilde, _q = connected_factorization(p)
    leaf = Graph(y_tilde)
    fol = Foliation(sigma=f_tilde.source, leaf_graph=leaf, map=f_tilde,
                    width=graph_map_width(f_tilde),
                    meta={"star_depth": depth, "input_width": W})
    if fol.width >= bound:
        raise FoliationError("factorized width unexpectedly above the bound")
    _ = base_lengths
    return fol


def _edge_window_coords(p: SimplicialMap, enum: FiberEnumerator,
                        e, lo: float, hi: float) -> np.ndarray:
    """Vertices of the preimage polytopes of the target-edge window [lo,hi]."""
    a, b = e
    src = p.source
    out = []
    for s in src.maximal_simplices():
        img = {p.vertex_map[v] for v in s}
        if not img <= {a, b}:
            continue
        params = {v: (0.0 if p.vertex_map[v] == a else 1.0) for v in s}
        inside = [v for v in s if lo - SNAP <= params[v] <= hi + SNAP]
        pts = [src.point(v) for v in inside]
        for u, w in itertools.combinations(s, 2):
            pu, pw = params[u], params[w]
            for c in (lo, hi):
                if min(pu, pw) + SNAP < c < max(pu, pw) - SNAP:
                    th = (c - pu) / (pw - pu)
                    pts.append((1 - th) * src.point(u) + th * src.point(w))
        if pts:
            out.append(np.array(pts))
    return np.vstack(out) if out else np.zeros((0, src.embed_dim))


# -- filtration -----------------------------------------------------------------


@dataclass
class Filtration:
    """Sublevel filtration of a connected graph from a base vertex,
    normalized so alpha(base) = 1/2 and max alpha = 1, affine and strictly
    monotone on each split edge."""

    graph: Graph
    base: int
    sup_distance: float
    nodes: list
    node_alpha: dict
    sub_edges: list  # (node_u, node_v, parent_edge, p_lo, p_hi)

    def alpha_node(self, node) -> float:
        return self.node_alpha[node]

    def target(self) -> MapTarget:
        return MapTarget({i: (u, v) for i, (u, v, _e, _lo, _hi) in
                          enumerate(self.sub_edges)},
                         extra_nodes=self.nodes)

    def alpha_of_position(self, pos) -> float:
        if pos[0] == "n":
            return self.node_alpha[pos[1]]
        _, key, s = pos
        u, v = self.sub_edges[key][0], self.sub_edges[key][1]
        return (1 - s) * self.node_alpha[u] + s * self.node_alpha[v]

    def level_points(self, t: float):
        """Points of alpha^{-1}(t): nodes at level t and interior crossings
        of split edges, as tracked-map positions."""
        fronts = []
        for n in self.nodes:
            if abs(self.node_alpha[n] - t) <= SNAP:
                fronts.append(("n", n))
        for key, (u, v, _e, _lo, _hi) in enumerate(self.sub_edges):
            au, av = self.node_alpha[u], self.node_alpha[v]
            if min(au, av) + SNAP < t < max(au, av) - SNAP:
                s = (t - au) / (av - au)
                fronts.append(("e", key, float(s)))
        return fronts

    def sublevel(self, t: float):
        """Closed sublevel subgraph data: nodes, full and cut sub-edges."""
        if t < 0.5 - SNAP:
            return {"nodes": [], "full": [], "partial": [], "empty": True,
                    "connected": True, "length": 0.0, "open_nodes": []}
        nodes = [n for n in self.nodes if self.node_alpha[n] <= t + SNAP]
        full, partial = [], []
        length = 0.0
        for key, (u, v, e, lo, hi) in enumerate(self.sub_edges):
            au, av = self.node_alpha[u], self.node_alpha[v]
            L = self.graph.lengths[e] * (hi - lo)
            if max(au, av) <= t + SNAP:
                full.append(key)
                length += L
            elif min(au, av) < t - SNAP:
                s = (t - au) / (av - au)
                partial.append((key, float(s)))
                length += L * (s if au < av else 1 - s)
        parent = {n: n for n in nodes}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for key in full:
            u, v = self.sub_edges[key][0], self.sub_edges[key][1]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[rv] = ru
        comps = {find(n) for n in nodes}
        open_nodes = [n for n in nodes if self.node_alpha[n] < t - SNAP]
        return {"nodes": nodes, "full": full, "partial": partial,
                "empty": not nodes, "connected": len(comps) <= 1,
                "length": length, "open_nodes": open_nodes}


def filtration(Z: Graph, z0: int) -> Filtration:
    """The normalized distance filtration alpha = dist/(2 sup) + 1/2.

    The supremum runs over the whole realization (far points inside edges
    count); edges are split at far points so alpha is affine per sub-edge.
    A single-vertex graph degenerates to alpha = 1/2.
    """
    if z0 not in Z.vertices:
        raise FoliationError(f"base {z0} is not a vertex")
    if not Z.is_connected():
        raise FoliationError("filtration needs a connected graph")
    dist = Z.vertex_distances(z0)
    sup = max(dist.values(), default=0.0)
    breaks = {}
    for e in Z.edges:
        a, b = e
        L = Z.lengths[e]
        if abs(dist[a] - dist[b]) < L - SNAP:
            u_star = (dist[b] - dist[a] + L) / (2 * L)
            far = dist[a] + u_star * L
            breaks[e] = (u_star, far)
            sup = max(sup, far)
    if sup <= SNAP:
        node = ("v", z0)
        return Filtration(graph=Z, base=z0, sup_distance=0.0, nodes=[node],
                          node_alpha={node: 0.5}, sub_edges=[])

    def alpha_of_dist(dv):
        return dv / (2 * sup) + 0.5

    nodes = [("v", a) for a in Z.vertices]
    node_alpha = {("v", a): alpha_of_dist(dist[a]) for a in Z.vertices}
    sub_edges = []
    for e in Z.edges:
        a, b = e
        if e in breaks:
            u_star, far = breaks[e]
            brk = ("x", e)
            nodes.append(brk)
            node_alpha[brk] = alpha_of_dist(far)
            sub_edges.append((("v", a), brk, e, 0.0, u_star))
            sub_edges.append((brk, ("v", b), e, u_star, 1.0))
        else:
            sub_edges.append((("v", a), ("v", b), e, 0.0, 1.0))
    return Filtration(graph=Z, base=z0, sup_distance=sup, nodes=nodes,
                      node_alpha=node_alpha, sub_edges=sub_edges)


def sublevel(F: Filtration, t: float):
    """Closed sublevel set data of the filtration at level t."""
    if not (-SNAP <= t <= 1 + SNAP):
        raise ValueError("t must lie in [0, 1]")
    return F.sublevel(t)


# -- tracked-complex plumbing ----------------------------------------------------


def _tracked_base(fols: list[Foliation], names: list[str]) -> TrackedComplex:
    sigma = fols[0].sigma
    for f in fols[1:]:
        if f.sigma.simplices != sigma.simplices:
            raise FoliationError("foliations must share the same complex")
    if sigma.coords is None:
        raise FoliationError("interpolation needs an embedded complex")
    coords = {v: np.asarray(sigma.coords[v], float) for v in sigma.vertices}
    T = TrackedComplex(coords=coords, maximal=list(sigma.maximal_simplices()))
    for name, f in zip(names, fols):
        T.targets[name] = MapTarget.from_graph(f.leaf_graph)
        T.positions[name] = {v: node_pos(f.map.vertex_map[v])
                             for v in sigma.vertices}
    T.validate()
    return T


def _prepare_filtration(T: TrackedComplex, name: str, fol: Foliation,
                        base_vertex: Optional[int] = None):
    """Split the target at filtration far points, refine the source so the
    map is affine onto split edges, reposition, and attach the alpha
    pullback as scalar 'g:<name>'."""
    z0 = base_vertex if base_vertex is not None else min(fol.leaf_graph.vertices)
    F = filtration(fol.leaf_graph, z0)
    breaks = {}
    for (u, v, e, lo, hi) in F.sub_edges:
        if 0 < lo < 1:
            breaks.setdefault(e, set()).add(lo)
        if 0 < hi < 1:
            breaks.setdefault(e, set()).add(hi)
    T2 = T.cut_map(name, {e: sorted(vals) for e, vals in breaks.items()})
    lookup = {}
    for key, (u, v, e, lo, hi) in enumerate(F.sub_edges):
        lookup.setdefault(e, []).append((key, lo, hi))
    tgt = F.target()
    newpos = {}
    for v in T2.coords:
        if v not in T2.positions[name]:
            continue
        p = T2.positions[name][v]
        if p[0] == "n":
            newpos[v] = node_pos(("v", p[1]))
        else:
            _, e, s = p
            for key, lo, hi in lookup[e]:
                if lo - SNAP <= s <= hi + SNAP:
                    newpos[v] = make_pos(tgt, key, (s - lo) / (hi - lo))
                    break
            else:
                raise FoliationError(f"position {p} not on any split edge")
    T2.targets[name] = tgt
    T2.positions[name] = newpos
    gname = f"g:{name}"
    T2.scalars[gname] = {v: F.alpha_of_position(newpos[v]) for v in newpos}
    T2.validate()
    return T2, F, gname


def snap_map_params(tc: TrackedComplex, name: str, tol: float = 1e-9):
    """Cluster near-equal interior parameters of a tracked map per target
    edge and snap positions to cluster representatives (in place)."""
    by_edge: dict = {}
    for v, p in tc.positions[name].items():
        if p[0] == "e":
            by_edge.setdefault(p[1], []).append(v)
    for ek, vs in by_edge.items():
        params = sorted((tc.positions[name][v][2], v) for v in vs)
        rep = None
        for s, v in params:
            if rep is None or s - rep > tol:
                rep = s
            tc.positions[name][v] = ("e", ek, rep)


def tracked_fiber_coords(tc: TrackedComplex, name: str, pos) -> np.ndarray:
    """Vertices of the fiber polytopes of a tracked map over a target
    position (node or interior edge point)."""
    target = tc.targets[name]
    pmap = tc.positions[name]
    pts = []
    if pos[0] == "n":
        node = pos[1]
        for s in tc.maximal:
            for v in s:
                if pmap[v] == ("n", node):
                    pts.append(tc.coords[v])
    else:
        _, qek, qs = pos
        for s in tc.maximal:
            ek, params = simplex_image_edge(target, [pmap[v] for v in s])
            if ek != qek:
                continue
            par = {v: params[i] for i, v in enumerate(s)}
            for v in s:
                if abs(par[v] - qs) <= SNAP:
                    pts.append(tc.coords[v])
            for u, w in itertools.combinations(s, 2):
                pu, pw = par[u], par[w]
                if min(pu, pw) + SNAP < qs < max(pu, pw) - SNAP:
                    th = (qs - pu) / (pw - pu)
                    pts.append((1 - th) * tc.coords[u] + th * tc.coords[w])
    return np.array(pts) if pts else np.zeros((0, len(next(iter(tc.coords.values())))))


# -- cell-level factorization over a refined graph target ------------------------


def _rnode(target: MapTarget, ek, p: float):
    u, v = target.endpoints(ek)
    if p <= SNAP:
        return ("n", u)
    if p >= 1 - SNAP:
        return ("n", v)
    return ("p", ek, p)


class _ReebData:
    """Connected components of the fibers of a tracked map over every cell
    of the refined target, restricted to a region subcomplex."""

    def __init__(self, tc: TrackedComplex, name: str, region_maximal: list):
        self.tc = tc
        self.name = name
        target = tc.targets[name]
        pos = tc.positions[name]
        closure = set()
        for s in region_maximal:
            for k in range(1, len(s) + 1):
                closure.update(itertools.combinations(s, k))
        self.closure = closure
        self.image: dict = {}
        for s in closure:
            ek, data = simplex_image_edge(target, [pos[v] for v in s])
            if ek is None:
                self.image[s] = ("node", ("n", data))
                continue
            ps = sorted(set(float(p) for p in data))
            merged = [ps[0]]
            for p in ps[1:]:
                if p - merged[-1] > SNAP:
                    merged.append(p)
            if len(merged) == 1:
                self.image[s] = ("node", _rnode(target, ek, merged[0]))
            elif len(merged) == 2:
                self.image[s] = ("edge", ek, merged[0], merged[1])
            else:
                raise FoliationError(
                    f"simplex {s} spans {len(merged)} refined cells; "
                    "cut_map must run first")
        # cells
        self.node_cells: set = set()
        self.edge_cells: set = set()
        for s, im in self.image.items():
            if im[0] == "node":
                self.node_cells.add(im[1])
            else:
                _, ek, lo, hi = im
                self.edge_cells.add((ek, lo, hi))
                self.node_cells.add(_rnode(target, ek, lo))
                self.node_cells.add(_rnode(target, ek, hi))
        self._members: dict = {}
        self._comp: dict = {}
        self.components: dict = {}
        for cell in sorted(self.node_cells, key=repr):
            self._build_cell(("node", cell))
        for cell in sorted(self.edge_cells, key=repr):
            self._build_cell(("edge", cell))

    def _covers(self, s, kind, cell) -> bool:
        im = self.image[s]
        if kind == "node":
            if im[0] == "node":
                return im[1] == cell
            _, ek, lo, hi = im
            target = self.tc.targets[self.name]
            return _rnode(target, ek, lo) == cell or _rnode(target, ek, hi) == cell
        return im in (("edge",) + cell,)

    def _build_cell(self, cellkey):
        kind, cell = cellkey
        members = [s for s in self.closure if self._covers(s, kind, cell)]
        if not members:
            return
        parent = {s: s for s in members}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        memset = set(members)
        for s in members:
            if len(s) > 1:
                for drop in range(len(s)):
                    face = s[:drop] + s[drop + 1:]
                    if face in memset:
                        ra, rb = find(s), find(face)
                        if ra != rb:
                            parent[rb] = ra
        groups: dict = {}
        for s in members:
            groups.setdefault(find(s), []).append(s)
        reps = sorted(groups, key=min)
        self.components[cellkey] = len(reps)
        self._members[cellkey] = {}
        for ci, rep in enumerate(reps):
            self._members[cellkey][ci] = sorted(groups[rep])
            for s in groups[rep]:
                self._comp[(s,) + (cellkey,)] = ci

    def comp_of(self, s, cellkey) -> int:
        return self._comp[(s, cellkey)]

    def members(self, cellkey, comp: int) -> list:
        return self._members[cellkey][comp]

    def node_fiber_coords(self, cell, comp: int) -> np.ndarray:
        pos = self.tc.positions[self.name]
        pts = []
        for s in self.members(("node", cell), comp):
            for v in s:
                pv = pos[v]
                if pv == cell or (pv[0] == "e" and cell[0] == "p"
                                  and pv[1] == cell[1]
                                  and abs(pv[2] - cell[2]) <= SNAP):
                    pts.append(self.tc.coords[v])
        dim = len(next(iter(self.tc.coords.values())))
        return np.array(pts) if pts else np.zeros((0, dim))

    def edge_preimage_coords(self, cell, comp: int) -> np.ndarray:
        pts = []
        for s in self.members(("edge", cell), comp):
            for v in s:
                pts.append(self.tc.coords[v])
        dim = len(next(iter(self.tc.coords.values())))
        return np.array(pts) if pts else np.zeros((0, dim))

    def vertex_cells(self):
        for cell in sorted(self.node_cells, key=repr):
            key = ("node", cell)
            if key in self.components:
                for ci in range(self.components[key]):
                    yield cell, ci

    def edge_cells_iter(self):
        for cell in sorted(self.edge_cells, key=repr):
            key = ("edge", cell)
            for ci in range(self.components.get(key, 0)):
                yield cell, ci


# -- single-event construction ----------------------------------------------------


class _UF:
    def __init__(self):
        self.parent = {}

    def add(self, a):
        if a not in self.parent:
            self.parent[a] = a
        return a

    def find(self, a):
        self.add(a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if repr(rb) < repr(ra):
                ra, rb = rb, ra
            self.parent[rb] = ra
        return self.find(a)


@dataclass
class EventFoliation:
    """One member of an interpolation family, with exact width data and
    merge provenance."""

    t: float
    width: float
    z1_interior_max: float
    classes: list[dict]
    n_leaf_nodes: int
    n_leaf_edges: int
    leaf_components: int
    leaf_h1: int
    vertex_labels: dict
    chain_front_max: int
    transition_max: int
    meta: dict = field(default_factory=dict)
    member: Optional[dict] = None

    def to_json_dict(self) -> dict:
        return {
            "t": self.t,
            "width": self.width,
            "classes": [
                {"diameter": c["diameter"],
                 "n_fronts": len(c["fronts"]),
                 "n_atoms": len(c["atoms"]),
                 "chain_front_max": c["chain_front_max"]}
                for c in self.classes],
            "leaf_nodes": self.n_leaf_nodes,
            "leaf_edges": self.n_leaf_edges,
            "leaf_h1": self.leaf_h1,
            "chain_front_max": self.chain_front_max,
        }


def _match_front(fronts: list, pos, F: Filtration) -> int:
    """Index of the front point a section position lands on."""
    for i, f in enumerate(fronts):
        if pos[0] == "n" and f[0] == "n" and pos[1] == f[1]:
            return i
        if pos[0] == "e" and f[0] == "e" and pos[1] == f[1] \
                and abs(pos[2] - f[2]) <= 1e-6:
            return i
    # near-node positions at node events
    for i, f in enumerate(fronts):
        if f[0] != "n":
            continue
        if pos[0] == "e":
            u, v, _e, _lo, _hi = F.sub_edges[pos[1]]
            if (pos[2] <= 1e-6 and u == f[1]) or (pos[2] >= 1 - 1e-6 and v == f[1]):
                return i
        if pos[0] == "n" and f[0] == "n":
            continue
    raise FoliationError(f"section position {pos} matches no front at this level")


def _max_fronts_on_path(adj: dict, nodes: list) -> int:
    """Max number of 'front' atoms on a simple path of the class graph."""
    best = 0
    node_list = sorted(adj, key=repr)

    def dfs(a, visited, count):
        nonlocal best
        best = max(best, count)
        for b in adj[a]:
            if b not in visited:
                visited.add(b)
                dfs(b, visited, count + (1 if b[0] == "front" else 0))
                visited.remove(b)

    for a in node_list:
        dfs(a, {a}, 1 if a[0] == "front" else 0)
        if len(adj) > 24:
            break
    return best


def _min_transition_diameter(adj: dict, layer: dict) -> int:
    """Max over atom pairs of the minimal number of layer changes along a
    path of the class graph (0/1 Dijkstra)."""
    import heapq
    nodes = sorted(adj, key=repr)
    worst = 0
    for srci, a in enumerate(nodes):
        dist = {a: 0}
        heap = [(0, srci, a)]
        cnt = srci
        while heap:
            d, _, x = heapq.heappop(heap)
            if d > dist.get(x, 1 << 30):
                continue
            for y in adj[x]:
                c = d + (1 if layer.get(y) != layer.get(x) else 0)
                if c < dist.get(y, 1 << 30):
                    dist[y] = c
                    cnt += 1
                    heapq.heappush(heap, (c, cnt, y))
        worst = max(worst, max(dist.values()))
    return worst


def build_event(Tprep: TrackedComplex, name0: str, name1: str, F1: Filtration,
                t: float, d1_cache: dict, original_vertices: list,
                layer_round: int = 1, want_member: bool = False) -> EventFoliation:
    """The foliation at sweep parameter t.

    Cuts the source at the level g = t of the filtration pullback, factors
    the name0 map over the closed upper part cell by cell, merges leaves
    along every front point of alpha^{-1}(t), and measures all fiber
    diameters exactly.
    """
    gname = f"g:{name1}"
    Tt = Tprep.cut_scalar(gname, [t])
    snap_map_params(Tt, name0)
    Tfull = Tt.cut_map(name0)
    snap_map_params(Tfull, name0)
    upper = Tfull.subwhere(gname, lo=t)
    reeb = _ReebData(Tfull, name0, upper.maximal)
    section = Tfull.subwhere(gname, lo=t, hi=t)
    fronts = F1.level_points(t)
    sub = F1.sublevel(t)

    uf = _UF()
    front_coords: dict[int, list] = {i: [] for i in range(len(fronts))}
    merge_edges: list[tuple] = []
    target1 = Tfull.targets[name1]
    pos1 = Tfull.positions[name1]
    for s in section.maximal:
        ek, data = simplex_image_edge(target1, [pos1[v] for v in s])
        p = node_pos(data) if ek is None else make_pos(target1, ek, float(np.mean(data)))
        fi = _match_front(fronts, p, F1)
        front_coords[fi].extend(Tfull.coords[v] for v in s)
        fa = ("front", fi)
        uf.add(fa)
        im = reeb.image[s]
        atoms = []
        if im[0] == "node":
            atoms.append(("vc", im[1], reeb.comp_of(s, ("node", im[1]))))
        else:
            _, ek0, lo, hi = im
            cell = (ek0, lo, hi)
            atoms.append(("ec", cell, reeb.comp_of(s, ("edge", cell))))
            tgt0 = Tfull.targets[name0]
            for p_end in (lo, hi):
                r = _rnode(tgt0, ek0, p_end)
                atoms.append(("vc", r, reeb.comp_of(s, ("node", r))))
        for a in atoms:
            uf.add(a)
            uf.union(fa, a)
            merge_edges.append((fa, a))

    # classes
    groups: dict = {}
    for a in list(uf.parent):
        groups.setdefault(uf.find(a), []).append(a)
    merged_atoms = set()
    adj_all: dict = {}
    for fa, a in merge_edges:
        adj_all.setdefault(fa, set()).add(a)
        adj_all.setdefault(a, set()).add(fa)
    layers = {}
    for root, atoms in groups.items():
        for a in atoms:
            merged_atoms.add(a)
            if a[0] == "front":
                layers[a] = layer_round
            else:
                kind, cell, comp = a
                key = ("node", cell) if kind == "vc" else ("edge", cell)
                mem = reeb.members(key, comp)
                layers[a] = max((Tfull.label_of(s).get("J", 0) for s in mem),
                                default=0)

    classes = []
    chain_max_global = 0
    trans_max_global = 0
    for root in sorted(groups, key=repr):
        atoms = groups[root]
        coords = []
        for a in atoms:
            if a[0] == "front":
                coords.extend(front_coords[a[1]])
            elif a[0] == "vc":
                coords.append(reeb.node_fiber_coords(a[1], a[2]))
            else:
                coords.append(reeb.edge_preimage_coords(a[1], a[2]))
        flat = [np.atleast_2d(c) for c in coords if np.size(c)]
        allpts = np.vstack(flat) if flat else np.zeros((0, 2))
        diam = float(kern.pairwise_diameter(allpts))
        adj = {a: sorted(adj_all.get(a, ()), key=repr) for a in atoms}
        chain = _max_fronts_on_path(adj, atoms)
        trans = _min_transition_diameter(adj, layers) if len(atoms) > 1 else 0
        chain_max_global = max(chain_max_global, chain)
        trans_max_global = max(trans_max_global, trans)
        classes.append({"atoms": sorted(atoms, key=repr),
                        "fronts": [a for a in atoms if a[0] == "front"],
                        "diameter": diam, "chain_front_max": chain,
                        "transitions": trans})

    # unmerged factored cells
    best_unmerged = 0.0
    for cell, ci in reeb.vertex_cells():
        a = ("vc", cell, ci)
        if a in merged_atoms:
            continue
        pts = reeb.node_fiber_coords(cell, ci)
        if len(pts):
            best_unmerged = max(best_unmerged, float(kern.pairwise_diameter(pts)))

    # untouched sublevel fibers
    z1_max = 0.0
    for n in sub["nodes"]:
        if F1.node_alpha[n] < t - SNAP:
            z1_max = max(z1_max, d1_cache[n])

    width = max([best_unmerged, z1_max] + [c["diameter"] for c in classes])

    # leaf graph counts (edge cells and sublevel pieces subdivided at a
    # midpoint node so the result is a simplicial graph)
    def node_label(n):
        if abs(F1.node_alpha[n] - t) <= SNAP:
            fi = _match_front(fronts, ("n", n), F1)
            return uf.find(("front", fi))
        return ("z1n", n)

    leaf_nodes = set()
    leaf_edges = []
    for cell, ci in reeb.vertex_cells():
        leaf_nodes.add(uf.find(("vc", cell, ci)))
    for i in range(len(fronts)):
        leaf_nodes.add(uf.find(("front", i)))
    for cell, ci in reeb.edge_cells_iter():
        a = ("ec", cell, ci)
        if a in merged_atoms:
            continue
        ek, lo, hi = cell
        tgt0 = Tfull.targets[name0]
        member = reeb.members(("edge", cell), ci)[0]
        end_labels = []
        for p_end in (lo, hi):
            r = _rnode(tgt0, ek, p_end)
            end_labels.append(uf.find(("vc", r, reeb.comp_of(member, ("node", r)))))
        mid = ("mid", "r0", cell, ci)
        leaf_nodes.add(mid)
        leaf_nodes.update(end_labels)
        leaf_edges.append((end_labels[0], mid))
        leaf_edges.append((mid, end_labels[1]))
    for key in sub["full"]:
        u, v = F1.sub_edges[key][0], F1.sub_edges[key][1]
        mid = ("mid", "z1", key)
        lu, lv = node_label(u), node_label(v)
        leaf_nodes.update([lu, lv, mid])
        leaf_edges.append((lu, mid))
        leaf_edges.append((mid, lv))
    for key, s_star in sub["partial"]:
        u, v = F1.sub_edges[key][0], F1.sub_edges[key][1]
        low = u if F1.node_alpha[u] < t else v
        fi = _match_front(fronts, ("e", key, s_star), F1)
        mid = ("mid", "z1p", key)
        lu = node_label(low)
        lf = uf.find(("front", fi))
        leaf_nodes.update([lu, lf, mid])
        leaf_edges.append((lu, mid))
        leaf_edges.append((mid, lf))
    for n in sub["nodes"]:
        leaf_nodes.add(node_label(n))

    # leaf components and h1
    ufg = _UF()
    for n in leaf_nodes:
        ufg.add(n)
    for a, b in leaf_edges:
        ufg.union(a, b)
    comps = {ufg.find(n) for n in leaf_nodes}
    h1 = len(leaf_edges) - len(leaf_nodes) + len(comps)

    # labels of the original vertices
    gsc = Tfull.scalars[gname]
    vertex_labels = {}
    for v in original_vertices:
        gv = gsc[v]
        if gv <= t + SNAP:
            p = pos1[v]
            if p[0] == "n":
                vertex_labels[v] = node_label(p[1])
            elif abs(F1.alpha_of_position(p) - t) <= SNAP:
                vertex_labels[v] = uf.find(("front", _match_front(fronts, p, F1)))
            else:
                vertex_labels[v] = ("z1e", p[1])
        else:
            p0 = Tfull.positions[name0][v]
            tgt0 = Tfull.targets[name0]
            r = p0 if p0[0] == "n" else _rnode(tgt0, p0[1], p0[2])
            ci = reeb.comp_of((v,), ("node", r))
            vertex_labels[v] = uf.find(("vc", r, ci))

    event = EventFoliation(
        t=t, width=width, z1_interior_max=z1_max, classes=classes,
        n_leaf_nodes=len(leaf_nodes), n_leaf_edges=len(leaf_edges),
        leaf_components=len(comps), leaf_h1=h1,
        vertex_labels=vertex_labels, chain_front_max=chain_max_global,
        transition_max=trans_max_global,
        meta={"fronts": len(fronts), "n_classes": len(classes)})
    if want_member:
        event.member = _extract_member(
            Tfull, upper, reeb, uf, fronts, sub, F1, name0, name1, t,
            layer_round)
    return event


def _extract_member(Tfull: TrackedComplex, upper: TrackedComplex,
                    reeb: _ReebData, uf: _UF, fronts: list, sub: dict,
                    F1: Filtration, name0: str, name1: str, t: float,
                    layer_round: int) -> dict:
    """Package the event foliation as a tracked map on a refined complex, so
    it can serve as the base member of a further interpolation round."""
    gname = f"g:{name1}"
    tgt0 = Tfull.targets[name0]

    # annotate layers and factored-cell provenance so cut pieces inherit them
    upper_set = set(upper.maximal)
    for s in Tfull.maximal:
        lab = dict(Tfull.label_of(s))
        if s in upper_set:
            im = reeb.image[s]
            if im[0] == "node":
                lab["rb"] = ("node", im[1], reeb.comp_of(s, ("node", im[1])))
            else:
                cell = (im[1], im[2], im[3])
                lab["rb"] = ("edge", cell, reeb.comp_of(s, ("edge", cell)))
        else:
            lab["J"] = layer_round
        Tfull.labels[s] = lab

    # mid levels for the upper side (per refined target edge of name0)
    params_per_edge: dict = {}
    for v, p in Tfull.positions[name0].items():
        if p[0] == "e":
            params_per_edge.setdefault(p[1], set()).add(p[2])
    mids0 = {}
    for ek, ps in params_per_edge.items():
        grid = sorted(set(ps) | {0.0, 1.0})
        mids0[ek] = [(a + b) / 2 for a, b in zip(grid[:-1], grid[1:])]
    for ek in Tfull.targets[name0].edges:
        if ek not in mids0:
            mids0[ek] = [0.5]
    # mid levels for the sublevel side (per split edge of name1)
    mids1 = {}
    for key in sub["full"]:
        mids1[key] = [0.5]
    partial_info = {}
    for key, s_star in sub["partial"]:
        u, v = F1.sub_edges[key][0], F1.sub_edges[key][1]
        low_is_u = F1.node_alpha[u] < t
        m = s_star / 2 if low_is_u else (s_star + 1) / 2
        mids1[key] = [m]
        partial_info[key] = (s_star, low_is_u, m)

    M = Tfull.cut_map(name0, mids0).cut_map(name1, mids1)

    def node_label(n):
        if abs(F1.node_alpha[n] - t) <= SNAP:
            fi = _match_front(fronts, ("n", n), F1)
            return uf.find(("front", fi))
        return ("z1n", n)

    # target graph of the member map
    edges: dict = {}
    extra_nodes: set = set()
    ec_endpoints: dict = {}
    for cell, ci in reeb.edge_cells_iter():
        a = ("ec", cell, ci)
        if a in uf.parent:
            continue
        ek, lo, hi = cell
        member = reeb.members(("edge", cell), ci)[0]
        ends = []
        for p_end in (lo, hi):
            r = _rnode(tgt0, ek, p_end)
            ends.append(uf.find(("vc", r, reeb.comp_of(member, ("node", r)))))
        mid = ("mid", "r0", cell, ci)
        edges[("h", "r0", cell, ci, 0)] = (ends[0], mid)
        edges[("h", "r0", cell, ci, 1)] = (mid, ends[1])
        ec_endpoints[(cell, ci)] = (ends[0], mid, ends[1])
    for key in sub["full"]:
        u, v = F1.sub_edges[key][0], F1.sub_edges[key][1]
        mid = ("mid", "z1", key)
        edges[("h", "z1", key, 0)] = (node_label(u), mid)
        edges[("h", "z1", key, 1)] = (mid, node_label(v))
    for key, s_star in sub["partial"]:
        u, v = F1.sub_edges[key][0], F1.sub_edges[key][1]
        s_star, low_is_u, m = partial_info[key]
        low = u if low_is_u else v
        fi = _match_front(fronts, ("e", key, s_star), F1)
        mid = ("mid", "z1p", key)
        edges[("h", "z1p", key, 0)] = (node_label(low), mid)
        edges[("h", "z1p", key, 1)] = (mid, uf.find(("front", fi)))
    for cell, ci in reeb.vertex_cells():
        extra_nodes.add(uf.find(("vc", cell, ci)))
    for i in range(len(fronts)):
        extra_nodes.add(uf.find(("front", i)))
    for n in sub["nodes"]:
        extra_nodes.add(node_label(n))
    target = MapTarget(edges, extra_nodes=extra_nodes)

    # positions of member vertices
    vertex_simplex: dict = {}
    for s in M.maximal:
        for v in s:
            vertex_simplex.setdefault(v, s)
    old_vertices = set(Tfull.coords)
    mempos: dict = {}
    for v in M.vertices():
        gv = M.scalars[gname][v]
        if gv > t + SNAP:
            if v in old_vertices:
                p0 = M.positions[name0][v]
                r = p0 if p0[0] == "n" else _rnode(tgt0, p0[1], p0[2])
                ci = reeb.comp_of((v,), ("node", r))
                mempos[v] = node_pos(uf.find(("vc", r, ci)))
                continue
            # mid-cut vertex: resolve via its piece's factored-cell provenance
            rb = M.label_of(vertex_simplex[v]).get("rb")
            kind, cell, comp = rb
            if kind == "node":
                mempos[v] = node_pos(uf.find(("vc", cell, comp)))
            else:
                a = ("ec", cell, comp)
                if a in uf.parent:
                    mempos[v] = node_pos(uf.find(a))
                else:
                    mempos[v] = node_pos(("mid", "r0", cell, comp))
        elif gv >= t - SNAP:
            fi = _match_front(fronts, M.positions[name1][v], F1)
            mempos[v] = node_pos(uf.find(("front", fi)))
        else:
            p1 = M.positions[name1][v]
            if p1[0] == "n":
                mempos[v] = node_pos(node_label(p1[1]))
                continue
            _, key, s = p1
            if key in partial_info:
                s_star, low_is_u, _m = partial_info[key]
                frac = s / s_star if low_is_u else (1 - s) / (1 - s_star)
                if abs(frac - 0.5) <= 1e-9:
                    mempos[v] = node_pos(("mid", "z1p", key))
                elif frac < 0.5:
                    mempos[v] = make_pos(target, ("h", "z1p", key, 0), frac * 2)
                else:
                    mempos[v] = make_pos(target, ("h", "z1p", key, 1), frac * 2 - 1)
            else:
                if abs(s - 0.5) <= 1e-9:
                    mempos[v] = node_pos(("mid", "z1", key))
                elif s < 0.5:
                    mempos[v] = make_pos(target, ("h", "z1", key, 0), s * 2)
                else:
                    mempos[v] = make_pos(target, ("h", "z1", key, 1), s * 2 - 1)

    M.targets["mem"] = target
    M.positions["mem"] = mempos
    M.validate()
    return {"complex": M, "map_name": "mem", "target": target}


# -- interpolation drivers ---------------------------------------------------------


@dataclass
class ParametricFoliation:
    """Family of foliations over an interval or a cone: per-event leaf data,
    exact widths, and the certified width bound."""

    kind: str
    params: list
    events: list[EventFoliation]
    width: float
    bound: float
    beta: int
    input_widths: tuple
    meta: dict = field(default_factory=dict)

    def width_rows(self):
        return [(p if np.isscalar(p) else tuple(p), e.width)
                for p, e in zip(self.params, self.events)]

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": [p if np.isscalar(p) else list(p) for p in self.params],
            "widths": [e.width for e in self.events],
            "width": self.width,
            "bound": self.bound,
            "beta": self.beta,
            "input_widths": list(self.input_widths),
            "events": [e.to_json_dict() for e in self.events],
            "meta": {k: self.meta[k] for k in sorted(self.meta)},
        }


def _event_grid(F: Filtration, with_midpoints: bool = True) -> list[float]:
    vals = sorted({0.0, 1.0} | {round(F.node_alpha[n], 12) for n in F.nodes})
    vals = [v for v in vals if -SNAP <= v <= 1 + SNAP]
    dedup = [vals[0]]
    for v in vals[1:]:
        if v - dedup[-1] > 1e-12:
            dedup.append(v)
    if not with_midpoints:
        return dedup
    out = []
    for a, b in zip(dedup[:-1], dedup[1:]):
        out.append(a)
        out.append((a + b) / 2)
    out.append(dedup[-1])
    return out


def _partition_labels(labels: dict) -> dict:
    groups: dict = {}
    for v, lab in labels.items():
        groups.setdefault(repr(lab), []).append(v)
    return {min(vs): sorted(vs) for vs in groups.values()}


def _same_partition(labels: dict, vertex_map: dict) -> bool:
    a = _partition_labels(labels)
    b = _partition_labels({v: vertex_map[v] for v in labels})
    return a == b


def _d_cache(Tprep: TrackedComplex, name: str, F: Filtration) -> dict:
    out = {}
    for n in F.nodes:
        pts = tracked_fiber_coords(Tprep, name, node_pos(n))
        out[n] = float(kern.pairwise_diameter(pts)) if len(pts) else 0.0
    return out


def interpolate(p0: Foliation, p1: Foliation, carry: Optional[dict] = None,
                base_vertex: Optional[int] = None,
                want_members: bool = False,
                check_bound: bool = True,
                extra_coords: Optional[dict] = None) -> ParametricFoliation:
    """Interpolate between two simple foliations of the same complex.

    Sweeps the distance filtration of the second leaf graph; every event
    foliation is certified against (beta+2) W(p0) + (beta+1) W(p1), where
    beta is the first homology rank of the surface.  A violation raises
    WidthBoundViolation: it would falsify this implementation.

    The metric is the embedding of p0's complex.  ``extra_coords`` may name
    alternative embeddings (vertex -> coords); they are carried through all
    refinements so members can later be re-measured in those metrics.
    """
    carry = dict(carry or {})
    names = ["p0", "p1"] + sorted(carry)
    fols = [p0, p1] + [carry[k] for k in sorted(carry)]
    T = _tracked_base(fols, names)
    for cname, cc in (extra_coords or {}).items():
        dim = len(next(iter(cc.values())))
        for i in range(dim):
            T.scalars[f"x:{cname}:{i}"] = {v: float(cc[v][i]) for v in cc}
    for cname in sorted(carry):
        T, _, _ = _prepare_filtration(T, cname, carry[cname])
    Tp, F1, _g1 = _prepare_filtration(T, "p1", p1, base_vertex)
    d1 = _d_cache(Tp, "p1", F1)
    beta = h1_rank(p0.sigma)
    bound = (beta + 2) * p0.width + (beta + 1) * p1.width
    grid = _event_grid(F1)
    originals = list(p0.sigma.vertices)
    events = []
    for t in grid:
        ev = build_event(Tp, "p0", "p1", F1, t, d1, originals,
                         layer_round=1, want_member=want_members)
        if check_bound and ev.width > bound + 1e-9:
            raise WidthBoundViolation(
                f"event width {ev.width} exceeds bound {bound} at t={t}")
        events.append(ev)
    pf = ParametricFoliation(
        kind="interval", params=list(grid), events=events,
        width=max(e.width for e in events), bound=bound, beta=beta,
        input_widths=(p0.width, p1.width),
        meta={"endpoint0_partition_ok": _same_partition(
                  events[0].vertex_labels, p0.map.vertex_map),
              "endpoint1_partition_ok": _same_partition(
                  events[-1].vertex_labels, p1.map.vertex_map),
              "endpoint0_width_match": abs(events[0].width - p0.width) <= 1e-9,
              "endpoint1_width_match": abs(events[-1].width - p1.width) <= 1e-9,
              "base_vertex": base_vertex})
    return pf


def _member_foliation_width(ev: EventFoliation) -> float:
    return ev.width


def parametric_interpolate(P_K: ParametricFoliation, p1_name: str,
                           p1: Foliation,
                           check_bound: bool = True) -> ParametricFoliation:
    """Interpolate between a family over K and one more foliation, over the
    cone on K.  Every member of the family is interpolated against p1 along
    the shared filtration sweep; slices over the base reproduce the family
    and the apex reproduces p1.

    Members must carry their extraction data (build the family with
    want_members=True) and the extra foliation must have been carried
    through the first round under `p1_name`.
    """
    if any(e.member is None for e in P_K.events):
        raise FoliationError("family lacks member provenance; "
                             "rebuild with want_members=True")
    beta = P_K.beta
    W0 = P_K.width
    bound = (beta + 2) * W0 + (beta + 1) * p1.width
    # the extra foliation was already split and repositioned when it was
    # carried through the first round; rebuild the same filtration
    F2 = filtration(p1.leaf_graph, min(p1.leaf_graph.vertices))
    gname = f"g:{p1_name}"
    params = []
    events = []
    for s_param, ev in zip(P_K.params, P_K.events):
        Mp = ev.member["complex"]
        if gname not in Mp.scalars:
            raise FoliationError(
                f"{p1_name} was not carried through the first round")
        d2 = _d_cache(Mp, p1_name, F2)
        tvals = {0.0, 1.0}
        tvals |= {round(F2.node_alpha[n], 12) for n in F2.nodes}
        gname = f"g:{p1_name}"
        tvals |= {round(Mp.scalars[gname][v], 12) for v in Mp.vertices()}
        tv = sorted(v for v in tvals if -SNAP <= v <= 1 + SNAP)
        dedup = [tv[0]]
        for v in tv[1:]:
            if v - dedup[-1] > 1e-12:
                dedup.append(v)
        grid = []
        for a, b in zip(dedup[:-1], dedup[1:]):
            grid.append(a)
            grid.append((a + b) / 2)
        grid.append(dedup[-1])
        originals = [v for v in Mp.vertices()]
        for t in grid:
            ev2 = build_event(Mp, ev.member["map_name"], p1_name, F2, t, d2,
                              originals, layer_round=2)
            if check_bound and ev2.width > bound + 1e-9:
                raise WidthBoundViolation(
                    f"cone event width {ev2.width} exceeds bound {bound} "
                    f"at (t={t}, s={s_param})")
            params.append((t, s_param))
            events.append(ev2)
    return ParametricFoliation(
        kind="cone", params=params, events=events,
        width=max(e.width for e in events), bound=bound, beta=beta,
        input_widths=(W0, p1.width),
        meta={"family_members": len(P_K.events)})


@dataclass
class SimplexFamilyAudit:
    m: int
    beta: int
    scale: float
    measured_width: float
    improved_bound: float
    improved_ok: bool
    chain_front_max: int
    chain_bound: int
    chain_ok: bool
    transition_max: int
    transition_bound: int
    transition_ok: bool

    def to_json_dict(self):
        return self.__dict__.copy()


@dataclass
class SimplexFamily:
    stages: list[ParametricFoliation]
    audit: SimplexFamilyAudit


def interpolate_simplex(fols: list[Foliation],
                        check_bound: bool = True) -> SimplexFamily:
    """Iterated interpolation of m+1 foliations over the m-simplex (m <= 2):
    first between p0 and p1, then between the family and p2.

    Inputs are normalized to width at most 1 by rescaling the embedding; the
    audit checks the family width against 2 beta m + m^2 + m + 1 in the
    normalized metric.
    """
    m = len(fols) - 1
    if m < 1 or m > 2:
        raise FoliationError("simplex interpolation implemented for m in {1, 2}")
    w_max = max(f.width for f in fols)
    scale = 1.0 / w_max if w_max > 1 else 1.0
    if scale != 1.0:
        fols = [f.rescaled(scale) for f in fols]
    beta = h1_rank(fols[0].sigma)
    stages = []
    if m == 1:
        fam = interpolate(fols[0], fols[1], check_bound=check_bound)
        stages.append(fam)
    else:
        fam01 = interpolate(fols[0], fols[1], carry={"p2": fols[2]},
                            want_members=True, check_bound=check_bound)
        stages.append(fam01)
        fam = parametric_interpolate(fam01, "p2", fols[2],
                                     check_bound=check_bound)
        stages.append(fam)
    improved = 2 * beta * m + m * m + m + 1
    chain_bound = 1 + beta
    trans_bound = (2 * beta + m + 1) * m
    chain_max = max(e.chain_front_max for st in stages for e in st.events)
    trans_max = max(e.transition_max for st in stages for e in st.events)
    audit = SimplexFamilyAudit(
        m=m, beta=beta, scale=scale,
        measured_width=fam.width,
        improved_bound=improved,
        improved_ok=bool(fam.width <= improved + 1e-9),
        chain_front_max=chain_max, chain_bound=chain_bound,
        chain_ok=bool(chain_max <= chain_bound),
        transition_max=trans_max, transition_bound=trans_bound,
        transition_ok=bool(trans_max <= trans_bound))
    return SimplexFamily(stages=stages, audit=audit)


@dataclass
class ChainAudit:
    chain_front_max: int
    chain_bound: int
    ok: bool
    flagged_events: list

    def to_json_dict(self):
        return {"chain_front_max": self.chain_front_max,
                "chain_bound": self.chain_bound, "ok": self.ok,
                "flagged_events": self.flagged_events}


def chain_audit(obj, beta: Optional[int] = None) -> ChainAudit:
    """Longest merge chain statistics of an event or family.

    Flags any fiber whose merge chain visits more than 1 + beta distinct
    leaves of the swept foliation: by the interpolation analysis that can
    only happen through an implementation bug.
    """
    if isinstance(obj, EventFoliation):
        events = [obj]
        params = [obj.t]
        if beta is None:
            raise FoliationError("chain_audit on a bare event needs beta")
        b = beta
    elif isinstance(obj, ParametricFoliation):
        events = obj.events
        params = obj.params
        b = obj.beta if beta is None else beta
    else:
        raise FoliationError("missing merge provenance")
    bound = 1 + b
    worst = 0
    flagged = []
    for p, e in zip(params, events):
        if e.classes is None:
            raise FoliationError("missing merge provenance")
        worst = max(worst, e.chain_front_max)
        if e.chain_front_max > bound:
            flagged.append({"param": p, "chain": e.chain_front_max})
    return ChainAudit(chain_front_max=worst, chain_bound=bound,
                      ok=not flagged, flagged_events=flagged)


def swap_member_coords(member: dict, coords_name: str) -> None:
    """Re-embed a member complex using tracked alternative coordinates
    (registered via interpolate's extra_coords)."""
    M = member["complex"]
    dims = sorted(int(k.split(":")[2]) for k in M.scalars
                  if k.startswith(f"x:{coords_name}:"))
    if not dims:
        raise FoliationError(f"no tracked coordinates named {coords_name!r}")
    fields = [M.scalars[f"x:{coords_name}:{i}"] for i in dims]
    M.coords = {v: np.array([f[v] for f in fields]) for v in M.coords
                if all(v in f for f in fields)}


def member_width(member: dict) -> float:
    """Exact width of an extracted member foliation in the current metric
    of its complex (max over leaf nodes of the node-fiber diameter)."""
    M = member["complex"]
    name = member["map_name"]
    nodes = set(M.targets[name].nodes)
    best = 0.0
    for n in sorted(nodes, key=repr):
        pts = tracked_fiber_coords(M, name, node_pos(n))
        if len(pts) > 1:
            best = max(best, float(kern.pairwise_diameter(pts)))
    return best
