"""Level-set cutting of embedded complexes (dim <= 2) that carry
graph-valued map data.

A TrackedComplex is a list of maximal simplices with per-vertex coordinates,
scalar fields, and positions in one or more target graphs.  All carried data
is affine on every simplex (positions of a simplex lie in one closed target
edge), which cutting preserves: cut vertices interpolate every field, and
cut keys are canonical per source edge so adjacent simplices stay glued.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

SNAP = 1e-9

# positions in a target graph: ("n", node) or ("e", edge_key, param in (0,1))
Position = tuple


def node_pos(node) -> Position:
    return ("n", node)


def edge_pos(edge_key, s: float) -> Position:
    if s <= SNAP or s >= 1 - SNAP:
        raise ValueError("edge positions must be interior; use node_pos")
    return ("e", edge_key, float(s))


class MapTarget:
    """Simple graph target: hashable nodes, edges keyed with endpoints."""

    def __init__(self, edges: dict, extra_nodes: Iterable = ()):
        self.edges = dict(edges)
        self.nodes = set(extra_nodes)
        self.by_pair = {}
        for k, (u, v) in self.edges.items():
            self.nodes.add(u)
            self.nodes.add(v)
            pair = (u, v) if repr(u) <= repr(v) else (v, u)
            self.by_pair[pair] = k

    def endpoints(self, edge_key):
        return self.edges[edge_key]

    def find_edge(self, u, v):
        pair = (u, v) if repr(u) <= repr(v) else (v, u)
        if pair not in self.by_pair:
            raise KeyError(f"no edge between {u} and {v}")
        return self.by_pair[pair]

    @classmethod
    def from_graph(cls, g):
        """Adapter for complexes.Graph: edge key = canonical vertex pair."""
        return cls({e: (e[0], e[1]) for e in g.edges}, extra_nodes=g.vertices)


def pos_param(target: MapTarget, pos: Position, edge_key) -> float:
    """Parameter of a position along a given edge (node endpoints are 0/1)."""
    u, v = target.endpoints(edge_key)
    if pos[0] == "e":
        if pos[1] != edge_key:
            raise ValueError(f"position on {pos[1]} queried along {edge_key}")
        return pos[2]
    node = pos[1]
    if node == u:
        return 0.0
    if node == v:
        return 1.0
    raise ValueError(f"node {node} is not an endpoint of {edge_key}")


def make_pos(target: MapTarget, edge_key, s: float) -> Position:
    u, v = target.endpoints(edge_key)
    if s <= SNAP:
        return node_pos(u)
    if s >= 1 - SNAP:
        return node_pos(v)
    return ("e", edge_key, float(s))


def simplex_image_edge(target: MapTarget, positions: list[Position]):
    """Common closed target edge of a simplex's vertex positions.

    Returns (edge_key, params) for a nondegenerate image or (None, node)
    when all positions coincide in one node.
    """
    edge_keys = {p[1] for p in positions if p[0] == "e"}
    if len(edge_keys) > 1:
        raise ValueError(f"positions span several edges: {edge_keys}")
    if edge_keys:
        ek = edge_keys.pop()
        return ek, [pos_param(target, p, ek) for p in positions]
    nodes = {p[1] for p in positions}
    if len(nodes) == 1:
        return None, nodes.pop()
    if len(nodes) == 2:
        a, b = nodes
        ek = target.find_edge(a, b)
        return ek, [pos_param(target, p, ek) for p in positions]
    raise ValueError(f"positions hit {len(nodes)} distinct nodes")


@dataclass
class TrackedComplex:
    coords: dict[int, np.ndarray]
    maximal: list[tuple[int, ...]]
    targets: dict[str, MapTarget] = field(default_factory=dict)
    positions: dict[str, dict[int, Position]] = field(default_factory=dict)
    scalars: dict[str, dict[int, float]] = field(default_factory=dict)
    labels: dict[tuple[int, ...], dict] = field(default_factory=dict)

    def __post_init__(self):
        self.maximal = [tuple(sorted(s)) for s in self.maximal]

    # -- structure ----------------------------------------------------------

    def closure(self) -> set[tuple[int, ...]]:
        out = set()
        for s in self.maximal:
            for k in range(1, len(s) + 1):
                out.update(itertools.combinations(s, k))
        return out

    def vertices(self) -> list[int]:
        return sorted({v for s in self.maximal for v in s})

    def validate(self):
        for name, pos in self.positions.items():
            target = self.targets[name]
            for s in self.maximal:
                simplex_image_edge(target, [pos[v] for v in s])

    def label_of(self, s: tuple[int, ...]) -> dict:
        return self.labels.get(tuple(sorted(s)), {})

    # -- derived values -------------------------------------------------------

    def map_params(self, name: str, s: tuple[int, ...]):
        """(edge_key, params per vertex) of a simplex under a tracked map."""
        pos = self.positions[name]
        return simplex_image_edge(self.targets[name], [pos[v] for v in s])

    # -- cutting ----------------------------------------------------------------

    def _interp_vertex(self, u, w, theta, new_id, exact: dict):
        """Create the cut vertex on edge (u, w) at fraction theta; `exact`
        holds field values to pin exactly (e.g. the cut level)."""
        self.coords[new_id] = (1 - theta) * self.coords[u] + theta * self.coords[w]
        for name, sc in self.scalars.items():
            sc[new_id] = (1 - theta) * sc[u] + theta * sc[w]
        for name, val in exact.get("scalars", {}).items():
            self.scalars[name][new_id] = val
        for name, pos in self.positions.items():
            target = self.targets[name]
            ek, data = simplex_image_edge(target, [pos[u], pos[w]])
            if ek is None:
                pos[new_id] = node_pos(data)
            else:
                pu, pw = data
                pos[new_id] = make_pos(target, ek, (1 - theta) * pu + theta * pw)
        for name, p in exact.get("positions", {}).items():
            self.positions[name][new_id] = p

    def cut(self, simplex_values, simplex_levels, cut_key,
            exact_fields=None) -> "TrackedComplex":
        """Cut every simplex along level sets of a per-simplex affine value.

        ``simplex_values(s)`` gives the vertex values on s, ``simplex_levels(s)``
        the levels to cut s at, ``cut_key(s, level)`` a canonical tag so
        shared edges get shared cut vertices (the level value itself must be
        bit-identical across simplices, which holds for shared level lists).
        ``exact_fields(level)`` may pin interpolated fields of cut vertices to
        exact values.
        """
        out = TrackedComplex(
            coords=dict(self.coords), maximal=[],
            targets=dict(self.targets),
            positions={k: dict(v) for k, v in self.positions.items()},
            scalars={k: dict(v) for k, v in self.scalars.items()},
            labels={})
        next_id = (max(self.coords) + 1) if self.coords else 0
        edge_cuts: dict = {}

        def cut_vertex(u, w, theta, tag, level):
            nonlocal next_id
            key = ((u, w) if u < w else (w, u), tag)
            if key in edge_cuts:
                return edge_cuts[key]
            vid = next_id
            next_id += 1
            if u > w:
                u, w, theta = w, u, 1 - theta
            exact = exact_fields(level) if exact_fields else {}
            out._interp_vertex(u, w, theta, vid, exact)
            edge_cuts[key] = vid
            return vid

        for s in self.maximal:
            vals = np.asarray(simplex_values(s), dtype=float)
            levels = sorted(lv for lv in simplex_levels(s)
                            if vals.min() + SNAP < lv < vals.max() - SNAP)
            lab = self.label_of(s)
            if not levels:
                out.maximal.append(s)
                if lab:
                    out.labels[s] = dict(lab)
                continue
            pieces = self._cut_simplex(s, vals, levels, cut_vertex, cut_key, out)
            for p in pieces:
                out.maximal.append(p)
                if lab:
                    out.labels[p] = dict(lab)
        out.maximal = sorted(set(out.maximal))
        return out

    def _cut_simplex(self, s, vals, levels, cut_vertex, cut_key, out):
        val_of = {v: vals[i] for i, v in enumerate(s)}
        # cut vertices per level per simplex edge
        cuts_at: dict[float, list[int]] = {lv: [] for lv in levels}
        for (u, w) in itertools.combinations(s, 2):
            vu, vw = val_of[u], val_of[w]
            lo, hi = min(vu, vw), max(vu, vw)
            for lv in levels:
                if lo + SNAP < lv < hi - SNAP:
                    theta = (lv - vu) / (vw - vu)
                    vid = cut_vertex(u, w, theta, cut_key(s, lv), lv)
                    val_of[vid] = lv
                    cuts_at[lv].append(vid)
        bounds = [float(vals.min())] + list(levels) + [float(vals.max())]
        pieces = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            members = [v for v in s if lo - SNAP <= val_of[v] <= hi + SNAP]
            for lv in (lo, hi):
                if lv in cuts_at:
                    members.extend(cuts_at[lv])
            members = sorted(set(members))
            if len(s) == 1:
                pieces.append(s)
            elif len(s) == 2:
                ordered = sorted(members, key=lambda v: val_of[v])
                for a, b in zip(ordered[:-1], ordered[1:]):
                    if a != b:
                        pieces.append((a, b) if a < b else (b, a))
            else:
                if len(members) < 3:
                    continue
                pieces.extend(self._triangulate_polygon(members, out))
        # dedupe degenerate duplicates
        return sorted(set(pieces))

    def _triangulate_polygon(self, members, out) -> list[tuple[int, ...]]:
        """Fan-triangulate a convex planar polygon given by vertex ids
        (sorted around the centroid in the supporting plane)."""
        P = np.array([out.coords[v] for v in members])
        c = P.mean(axis=0)
        D = P - c
        # orthonormal basis of the supporting plane
        u = None
        for d in D:
            if np.linalg.norm(d) > 1e-13:
                u = d / np.linalg.norm(d)
                break
        if u is None:
            return []
        w = None
        for d in D:
            r = d - (d @ u) * u
            if np.linalg.norm(r) > 1e-12:
                w = r / np.linalg.norm(r)
                break
        if w is None:
            # collinear: no area, nothing to emit at top dimension
            return []
        ang = np.arctan2(D @ w, D @ u)
        order = [members[i] for i in np.argsort(ang, kind="stable")]
        # rotate so the smallest id leads; fan from it
        k = order.index(min(order))
        order = order[k:] + order[:k]
        tris = []
        for i in range(1, len(order) - 1):
            t = tuple(sorted((order[0], order[i], order[i + 1])))
            if len(set(t)) == 3:
                tris.append(t)
        return tris

    # -- convenience cuts --------------------------------------------------------

    def cut_scalar(self, name: str, levels: list[float]) -> "TrackedComplex":
        levels = sorted(set(float(x) for x in levels))
        sc = self.scalars[name]

        def values(s):
            return [sc[v] for v in s]

        def levs(_s):
            return levels

        def key(_s, lv):
            return ("sc", name, lv)

        def exact(level):
            return {"scalars": {name: level}}

        return self.cut(values, levs, key, exact)

    def cut_map(self, name: str, levels_per_edge: Optional[dict] = None,
                include_midpoints: bool = False) -> "TrackedComplex":
        """Cut at target-parameter levels so every piece maps into a single
        refined target cell.  Default levels: all vertex parameters present
        per target edge (plus 1/2 per refined cell when midpoints are on)."""
        pos = self.positions[name]
        target = self.targets[name]
        if levels_per_edge is None:
            levels_per_edge = {}
            for s in self.maximal:
                ek, params = self.map_params(name, s)
                if ek is None:
                    continue
                levels_per_edge.setdefault(ek, set()).update(
                    float(p) for p in params)
            levels_per_edge = {k: sorted(v) for k, v in levels_per_edge.items()}
            if include_midpoints:
                for k, ps in levels_per_edge.items():
                    grid = sorted(set(ps) | {0.0, 1.0})
                    mids = [(a + b) / 2 for a, b in zip(grid[:-1], grid[1:])]
                    levels_per_edge[k] = sorted(set(ps) | set(mids))

        def values(s):
            ek, params = self.map_params(name, s)
            if ek is None:
                return [0.0] * len(s)
            return params

        def levs(s):
            ek, _ = self.map_params(name, s)
            if ek is None:
                return []
            return levels_per_edge.get(ek, [])

        def key(s, lv):
            ek, _ = self.map_params(name, s)
            return ("map", name, ek, lv)

        return self.cut(values, levs, key, None)

    def subwhere(self, name: str, lo: Optional[float] = None,
                 hi: Optional[float] = None) -> "TrackedComplex":
        """Subcomplex of the closure whose vertices satisfy lo <= value <= hi
        (with snap tolerance); returns its maximal simplices."""
        sc = self.scalars[name]

        def ok(v):
            val = sc[v]
            if lo is not None and val < lo - SNAP:
                return False
            if hi is not None and val > hi + SNAP:
                return False
            return True

        keep = set()
        for s in self.maximal:
            good = tuple(v for v in s if ok(v))
            if good:
                keep.add(good)
        # maximal elements
        keep = sorted(keep, key=len, reverse=True)
        maximal = []
        seen = set()
        for s in keep:
            if s in seen:
                continue
            maximal.append(s)
            for k in range(1, len(s) + 1):
                seen.update(itertools.combinations(s, k))
        sub = TrackedComplex(
            coords=self.coords, maximal=sorted(maximal),
            targets=self.targets, positions=self.positions,
            scalars=self.scalars,
            labels={s: self.label_of(s) for s in maximal if self.label_of(s)})
        return sub
