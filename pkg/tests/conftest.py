import itertools

import numpy as np
import pytest

from urywidth.complexes import Graph, SimplicialComplex, SimplicialMap


@pytest.fixture
def unit_square():
    return SimplicialComplex(
        [(0, 1, 2), (1, 2, 3)],
        {0: np.array([0.0, 0.0]), 1: np.array([1.0, 0.0]),
         2: np.array([0.0, 1.0]), 3: np.array([1.0, 1.0])})


@pytest.fixture
def hollow_square():
    return SimplicialComplex(
        [(0, 1), (1, 3), (2, 3), (0, 2)],
        {0: np.array([0.0, 0.0]), 1: np.array([1.0, 0.0]),
         2: np.array([0.0, 1.0]), 3: np.array([1.0, 1.0])})


@pytest.fixture
def segment():
    return SimplicialComplex([(10, 11)],
                             {10: np.array([0.0]), 11: np.array([1.0])})


@pytest.fixture
def unit_cube():
    verts = {i: np.array(v, float)
             for i, v in enumerate(itertools.product([0, 1], repeat=3))}

    def vid(pt):
        return int(pt[0]) * 4 + int(pt[1]) * 2 + int(pt[2])

    tets = []
    for perm in itertools.permutations(range(3)):
        chain = [np.zeros(3)]
        for ax in perm:
            chain.append(chain[-1] + np.eye(3)[ax])
        tets.append(tuple(vid(c) for c in chain))
    return SimplicialComplex(tets, verts)


def random_complex(rng: np.random.Generator, n_verts: int = 7) -> SimplicialComplex:
    """Small random embedded complex: random triangles and edges on random
    points, closed under faces."""
    n = int(rng.integers(4, n_verts + 1))
    pts = rng.uniform(-1, 1, size=(n, 3))
    simplices = []
    n_tris = int(rng.integers(1, 5))
    for _ in range(n_tris):
        simplices.append(tuple(rng.choice(n, size=3, replace=False)))
    n_edges = int(rng.integers(1, 5))
    for _ in range(n_edges):
        simplices.append(tuple(rng.choice(n, size=2, replace=False)))
    simplices += [(v,) for v in range(n)]
    return SimplicialComplex(simplices, {i: pts[i] for i in range(n)})


def grid_patch(rng: np.random.Generator, nx: int = 3, ny: int = 3):
    """Triangulated grid patch with a few random cells removed."""
    def vid(i, j):
        return i * (ny + 1) + j

    drop = set()
    if rng.uniform() < 0.5:
        drop.add((int(rng.integers(0, nx)), int(rng.integers(0, ny))))
    tris = []
    for i in range(nx):
        for j in range(ny):
            if (i, j) in drop:
                continue
            tris.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
            tris.append((vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)))
    used = {v for t in tris for v in t}
    coords = {vid(i, j): np.array([i, j], float)
              for i in range(nx + 1) for j in range(ny + 1)
              if vid(i, j) in used}
    return SimplicialComplex(tris, coords)


def random_levels_map(rng: np.random.Generator, K: SimplicialComplex):
    """Random simplicial map onto a path graph via hop distances."""
    from urywidth.instances import bfs_levels, path_graph
    verts = list(K.vertices)
    n_src = int(rng.integers(1, 3))
    sources = list(rng.choice(verts, size=n_src, replace=False))
    levels = bfs_levels(K, sources)
    n = max(levels.values()) + 1
    tgt = path_graph(n)
    return SimplicialMap(K, tgt.complex, levels), tgt
