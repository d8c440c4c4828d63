"""Demo surfaces and foliation builders used by the CLI demos and the
randomized certification sweeps: triangulated disks, annuli, two-hole
squares, and distance/coordinate foliations on them."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .complexes import Graph, SimplicialComplex, SimplicialMap, connected_factorization
from .foliation import Foliation
from .width import graph_map_width


def path_graph(n_vertices: int, spacing: float = 1.0) -> Graph:
    coords = {i: np.array([i * spacing]) for i in range(n_vertices)}
    edges = [(i, i + 1) for i in range(n_vertices - 1)]
    if n_vertices == 1:
        return Graph(SimplicialComplex([(0,)], coords))
    return Graph(SimplicialComplex(edges, coords))


def cycle_graph(n_vertices: int) -> Graph:
    ang = 2 * np.pi * np.arange(n_vertices) / n_vertices
    coords = {i: np.array([np.cos(a), np.sin(a)]) for i, a in enumerate(ang)}
    edges = [(i, (i + 1) % n_vertices) for i in range(n_vertices)]
    return Graph(SimplicialComplex(edges, coords))


def annulus_surface(n_sectors: int = 8, n_rings: int = 2,
                    r_inner: float = 0.5, r_outer: float = 1.0) -> SimplicialComplex:
    """Polar-grid triangulated annulus (first homology rank 1)."""
    def vid(i, j):
        return i * n_sectors + (j % n_sectors)

    coords = {}
    for i in range(n_rings + 1):
        r = r_inner + (r_outer - r_inner) * i / n_rings
        for j in range(n_sectors):
            a = 2 * np.pi * j / n_sectors
            coords[vid(i, j)] = np.array([r * np.cos(a), r * np.sin(a)])
    tris = []
    for i in range(n_rings):
        for j in range(n_sectors):
            tris.append((vid(i, j), vid(i, j + 1), vid(i + 1, j)))
            tris.append((vid(i, j + 1), vid(i + 1, j), vid(i + 1, j + 1)))
    return SimplicialComplex(tris, coords)


def disk_surface(n_sectors: int = 8, n_rings: int = 2,
                 radius: float = 1.0) -> SimplicialComplex:
    """Fan-plus-rings triangulated disk (contractible)."""
    def vid(i, j):
        return 1 + (i - 1) * n_sectors + (j % n_sectors)

    coords = {0: np.zeros(2)}
    for i in range(1, n_rings + 1):
        r = radius * i / n_rings
        for j in range(n_sectors):
            a = 2 * np.pi * j / n_sectors
            coords[vid(i, j)] = np.array([r * np.cos(a), r * np.sin(a)])
    tris = []
    for j in range(n_sectors):
        tris.append((0, vid(1, j), vid(1, j + 1)))
    for i in range(1, n_rings):
        for j in range(n_sectors):
            tris.append((vid(i, j), vid(i, j + 1), vid(i + 1, j)))
            tris.append((vid(i, j + 1), vid(i + 1, j), vid(i + 1, j + 1)))
    return SimplicialComplex(tris, coords)


def two_hole_square(n: int = 6, side: float = 3.0) -> SimplicialComplex:
    """Square grid with two removed cells: a planar surface of first
    homology rank 2."""
    if n < 5:
        raise ValueError("need n >= 5 for two separated holes")
    h = side / n

    def vid(i, j):
        return i * (n + 1) + j

    holes = {(1, 1), (n - 2, n - 2)}
    coords = {}
    for i in range(n + 1):
        for j in range(n + 1):
            coords[vid(i, j)] = np.array([i * h, j * h])
    tris = []
    for i in range(n):
        for j in range(n):
            if (i, j) in holes:
                continue
            tris.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
            tris.append((vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)))
    used = {v for t in tris for v in t}
    return SimplicialComplex(tris, {v: coords[v] for v in used})


def radial_foliation(annulus: SimplicialComplex, n_sectors: int,
                     n_rings: int) -> Foliation:
    """Project a polar annulus to the ring-index path graph."""
    tgt = path_graph(n_rings + 1)
    vm = {v: v // n_sectors for v in annulus.vertices}
    return Foliation.build(annulus, tgt, vm, meta={"kind": "radial"})


def angular_foliation(annulus: SimplicialComplex, n_sectors: int) -> Foliation:
    """Project a polar annulus to the sector-index cycle graph."""
    tgt = cycle_graph(n_sectors)
    vm = {v: v % n_sectors for v in annulus.vertices}
    return Foliation.build(annulus, tgt, vm, meta={"kind": "angular"})


def vertex_level_foliation(sigma: SimplicialComplex, levels: dict[int, int],
                           meta: Optional[dict] = None) -> Foliation:
    """Foliation from an integer vertex labelling whose span on every
    simplex is at most one; fibers are made connected by factorization, so
    the output lives on the barycentric subdivision of sigma."""
    lo = min(levels.values())
    levels = {v: levels[v] - lo for v in levels}
    n = max(levels.values()) + 1
    tgt = path_graph(n)
    f = SimplicialMap(sigma, tgt.complex, levels)
    f_tilde, y_tilde, _q = connected_factorization(f)
    leaf = Graph(y_tilde)
    return Foliation(sigma=f_tilde.source, leaf_graph=leaf, map=f_tilde,
                     width=graph_map_width(f_tilde), meta=dict(meta or {}))


def bfs_levels(sigma: SimplicialComplex, sources: list[int]) -> dict[int, int]:
    """Hop distance from a source set in the 1-skeleton (span <= 1 on every
    simplex, so it induces a simplicial map to a path)."""
    from collections import deque
    dist = {v: -1 for v in sigma.vertices}
    dq = deque()
    for s in sources:
        dist[s] = 0
        dq.append(s)
    adj: dict[int, list[int]] = {v: [] for v in sigma.vertices}
    for e in sigma.k_simplices(1):
        adj[e[0]].append(e[1])
        adj[e[1]].append(e[0])
    while dq:
        v = dq.popleft()
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                dq.append(w)
    return dist


def random_foliation_pair(surface_kind: str, seed: int):
    """A randomized pair of simple foliations on a shared surface.

    surface_kind: 'disk' (beta 0), 'annulus' (beta 1), 'twohole' (beta 2).
    Both foliations are factorized vertex-level maps on the subdivided
    surface, so they share their complex.
    """
    rng = np.random.default_rng(seed)
    if surface_kind == "disk":
        sigma = disk_surface(n_sectors=6, n_rings=2)
    elif surface_kind == "annulus":
        sigma = annulus_surface(n_sectors=7, n_rings=1)
    elif surface_kind == "twohole":
        sigma = two_hole_square(n=5)
    else:
        raise ValueError(f"unknown surface kind {surface_kind!r}")

    def pick_levels():
        mode = rng.integers(0, 3)
        verts = list(sigma.vertices)
        if mode == 0:
            src = [verts[rng.integers(0, len(verts))]]
        elif mode == 1:
            src = list(rng.choice(verts, size=2, replace=False))
        else:
            axis = rng.normal(size=2)
            axis /= np.linalg.norm(axis)
            vals = {v: float(sigma.point(v) @ axis) for v in verts}
            lo, hi = min(vals.values()), max(vals.values())
            span = max(
                max(vals[v] for v in s) - min(vals[v] for v in s)
                for s in sigma.maximal_simplices())
            k = max(2, min(int((hi - lo) / (span + 1e-12)), 6))
            return {v: min(int((vals[v] - lo) / (hi - lo + 1e-12) * k), k - 1)
                    for v in verts}
        return bfs_levels(sigma, src)

    lv0, lv1 = pick_levels(), pick_levels()
    p0 = vertex_level_foliation(sigma, lv0, meta={"seed": seed, "role": 0})
    p1 = vertex_level_foliation(sigma, lv1, meta={"seed": seed, "role": 1})
    return p0, p1
