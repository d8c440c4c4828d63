"""Hot numeric kernels with numba-accelerated and pure-numpy implementations.

The default backend is numba when importable; set URYWIDTH_DISABLE_NUMBA=1
to force the numpy path.  Both implementations are importable directly
(``numpy_backend``/``numba_backend``) so tests and the benchmark can compare
them on identical inputs.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("URYWIDTH_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

# the default TBB on this image is too old for numba's TBB layer
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    if _DISABLE:
        raise ImportError("numba disabled by URYWIDTH_DISABLE_NUMBA")
    from numba import njit, prange
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range


# -- pure numpy implementations ---------------------------------------------


def _join_batch_np(X: np.ndarray, h: float, d: int):
    """Barycentric data of points in the standard grid triangulation.

    Returns (t, z, lam, order, base) where t[:, i] are the color-block
    weights (blocks of d+1 consecutive colors), z[:, i] the block centroids
    (nan rows where t_i = 0), lam the simplex barycentric weights, order the
    coordinate permutation, base the lattice base point.
    """
    X = np.asarray(X, dtype=np.float64)
    N, n = X.shape
    m1 = (n + 1) // (d + 1)
    U = X / h
    B = np.floor(U)
    frac = U - B
    order = np.argsort(-frac, axis=1, kind="stable")
    fs = np.take_along_axis(frac, order, axis=1)
    lam = np.empty((N, n + 1))
    lam[:, 0] = 1.0 - fs[:, 0]
    if n > 1:
        lam[:, 1:n] = fs[:, : n - 1] - fs[:, 1:]
    lam[:, n] = fs[:, n - 1]
    steps = np.zeros((N, n, n))
    np.put_along_axis(steps, order[:, :, None], 1.0, axis=2)
    V = np.empty((N, n + 1, n))
    V[:, 0] = B
    V[:, 1:] = B[:, None, :] + np.cumsum(steps, axis=1)
    V *= h
    s0 = B.sum(axis=1).astype(np.int64)
    colors = (s0[:, None] + np.arange(n + 1)[None, :]) % (n + 1)
    blocks = colors // (d + 1)
    t = np.zeros((N, m1))
    z = np.full((N, m1, n), np.nan)
    for i in range(m1):
        w = np.where(blocks == i, lam, 0.0)
        ti = w.sum(axis=1)
        t[:, i] = ti
        num = np.einsum("nj,njk->nk", w, V)
        good = ti > 0
        z[good, i] = num[good] / ti[good, None]
    return t, z, lam, order, B


def _pairwise_diameter_np(P: np.ndarray) -> float:
    P = np.asarray(P, dtype=np.float64)
    N = len(P)
    if N < 2:
        return 0.0
    best = 0.0
    step = 2048
    for i0 in range(0, N, step):
        A = P[i0:i0 + step]
        for j0 in range(i0, N, step):
            C = P[j0:j0 + step]
            d2 = ((A[:, None, :] - C[None, :, :]) ** 2).sum(-1)
            m = float(d2.max())
            if m > best:
                best = m
    return float(np.sqrt(best))


def _group_diameters_np(P: np.ndarray, starts: np.ndarray) -> np.ndarray:
    out = np.zeros(len(starts) - 1)
    for g in range(len(starts) - 1):
        out[g] = _pairwise_diameter_np(P[starts[g]:starts[g + 1]])
    return out


def _cube_skeleton_dists_np(X: np.ndarray, eps: float):
    """Distances to the eps-grid 1-skeleton and to the dual grid 1-skeleton.

    Closed form per cube: the two smallest per-coordinate distances to the
    nearest (half-)integer plane give the distance to the skeleton lines.
    """
    X = np.asarray(X, dtype=np.float64)
    d = np.abs(X - eps * np.round(X / eps))
    dd = eps / 2.0 - d
    d2 = d * d
    dd2 = dd * dd
    d0 = np.sqrt(np.maximum(d2.sum(1) - d2.max(1), 0.0))
    d1 = np.sqrt(np.maximum(dd2.sum(1) - dd2.max(1), 0.0))
    return d0, d1


def _box_two_stage_np(local: np.ndarray) -> np.ndarray:
    """Radial projection to the boundary of [-1,1]^k, then radial within the
    landing facet from its center; lands on the codimension-2 skeleton."""
    local = np.array(local, dtype=np.float64)
    a = np.abs(local).max(axis=1)
    a = np.where(a == 0, 1.0, a)
    Q = local / a[:, None]
    k = np.argmax(np.abs(Q), axis=1)
    R = Q.copy()
    rows = np.arange(len(Q))
    face_val = Q[rows, k]
    U = Q.copy()
    U[rows, k] = 0.0
    b = np.abs(U).max(axis=1)
    b = np.where(b == 0, 1.0, b)
    R = U / b[:, None]
    R[rows, k] = face_val
    return R


def _cube_witness_np(X: np.ndarray, eps: float, to_dual: bool) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if to_dual:
        center = eps * np.round(X / eps)
    else:
        center = eps * (np.floor(X / eps) + 0.5)
    local = (X - center) / (eps / 2.0)
    R = _box_two_stage_np(local)
    return center + R * (eps / 2.0)


class _NumpyBackend:
    name = "numpy"
    join_batch = staticmethod(_join_batch_np)
    pairwise_diameter = staticmethod(_pairwise_diameter_np)
    group_diameters = staticmethod(_group_diameters_np)
    cube_skeleton_dists = staticmethod(_cube_skeleton_dists_np)
    cube_witness = staticmethod(_cube_witness_np)


numpy_backend = _NumpyBackend()


# -- numba implementations ---------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True, parallel=True)
    def _join_batch_core(X, h, d, t, z, lam, order, B):
        N, n = X.shape
        for p in prange(N):
            for j in range(n):
                u = X[p, j] / h
                b = np.floor(u)
                B[p, j] = b
            # stable descending argsort of fractional parts
            for j in range(n):
                order[p, j] = j
            for a in range(1, n):
                key = order[p, a]
                fk = X[p, key] / h - B[p, key]
                b_ = a - 1
                while b_ >= 0:
                    o = order[p, b_]
                    fo = X[p, o] / h - B[p, o]
                    if (fo < fk) or (fo == fk and o > key):
                        order[p, b_ + 1] = o
                        b_ -= 1
                    else:
                        break
                order[p, b_ + 1] = key
            fprev = 1.0
            ssum = 0.0
            for j in range(n):
                ssum += B[p, j]
            s0 = int(ssum) % (n + 1)
            if s0 < 0:
                s0 += n + 1
            m1 = (n + 1) // (d + 1)
            for i in range(m1):
                t[p, i] = 0.0
                for c in range(n):
                    z[p, i, c] = 0.0
            # vertex_0 = B, vertex_j adds e_{order[j-1]}
            vw = np.empty(n)
            for c in range(n):
                vw[c] = B[p, c]
            for j in range(n + 1):
                if j == 0:
                    f_here = X[p, order[p, 0]] / h - B[p, order[p, 0]]
                    w = 1.0 - f_here
                else:
                    fj = X[p, order[p, j - 1]] / h - B[p, order[p, j - 1]]
                    if j < n:
                        fnext = X[p, order[p, j]] / h - B[p, order[p, j]]
                    else:
                        fnext = 0.0
                    w = fj - fnext
                    vw[order[p, j - 1]] += 1.0
                lam[p, j] = w
                color = (s0 + j) % (n + 1)
                blk = color // (d + 1)
                t[p, blk] += w
                for c in range(n):
                    z[p, blk, c] += w * vw[c] * h
            for i in range(m1):
                if t[p, i] > 0.0:
                    for c in range(n):
                        z[p, i, c] /= t[p, i]
                else:
                    for c in range(n):
                        z[p, i, c] = np.nan

    def _join_batch_nb(X, h, d):
        X = np.ascontiguousarray(X, dtype=np.float64)
        N, n = X.shape
        m1 = (n + 1) // (d + 1)
        t = np.empty((N, m1))
        z = np.empty((N, m1, n))
        lam = np.empty((N, n + 1))
        order = np.empty((N, n), dtype=np.int64)
        B = np.empty((N, n))
        _join_batch_core(X, float(h), int(d), t, z, lam, order, B)
        return t, z, lam, order, B

    @njit(cache=True)
    def _pairwise_diameter_nb_core(P):
        N = P.shape[0]
        best = 0.0
        for i in range(N):
            for j in range(i + 1, N):
                s = 0.0
                for c in range(P.shape[1]):
                    dd = P[i, c] - P[j, c]
                    s += dd * dd
                if s > best:
                    best = s
        return np.sqrt(best)

    def _pairwise_diameter_nb(P):
        P = np.ascontiguousarray(P, dtype=np.float64)
        if len(P) < 2:
            return 0.0
        return float(_pairwise_diameter_nb_core(P))

    @njit(cache=True, parallel=True)
    def _group_diameters_nb_core(P, starts, out):
        for g in prange(len(starts) - 1):
            best = 0.0
            for i in range(starts[g], starts[g + 1]):
                for j in range(i + 1, starts[g + 1]):
                    s = 0.0
                    for c in range(P.shape[1]):
                        dd = P[i, c] - P[j, c]
                        s += dd * dd
                    if s > best:
                        best = s
            out[g] = np.sqrt(best)

    def _group_diameters_nb(P, starts):
        P = np.ascontiguousarray(P, dtype=np.float64)
        starts = np.ascontiguousarray(starts, dtype=np.int64)
        out = np.empty(len(starts) - 1)
        _group_diameters_nb_core(P, starts, out)
        return out

    @njit(cache=True, parallel=True)
    def _cube_skeleton_dists_nb_core(X, eps, d0, d1):
        N, n = X.shape
        for p in prange(N):
            s0 = 0.0
            m0 = 0.0
            s1 = 0.0
            m1 = 0.0
            for c in range(n):
                d = abs(X[p, c] - eps * np.round(X[p, c] / eps))
                dd = eps / 2.0 - d
                s0 += d * d
                s1 += dd * dd
                if d * d > m0:
                    m0 = d * d
                if dd * dd > m1:
                    m1 = dd * dd
            d0[p] = np.sqrt(max(s0 - m0, 0.0))
            d1[p] = np.sqrt(max(s1 - m1, 0.0))

    def _cube_skeleton_dists_nb(X, eps):
        X = np.ascontiguousarray(X, dtype=np.float64)
        d0 = np.empty(len(X))
        d1 = np.empty(len(X))
        _cube_skeleton_dists_nb_core(X, float(eps), d0, d1)
        return d0, d1

    @njit(cache=True, parallel=True)
    def _cube_witness_nb_core(X, eps, to_dual, out):
        N, n = X.shape
        for p in prange(N):
            a = 0.0
            for c in range(n):
                if to_dual:
                    ctr = eps * np.round(X[p, c] / eps)
                else:
                    ctr = eps * (np.floor(X[p, c] / eps) + 0.5)
                out[p, c] = (X[p, c] - ctr) / (eps / 2.0)
                if abs(out[p, c]) > a:
                    a = abs(out[p, c])
            if a == 0.0:
                a = 1.0
            k = 0
            qk = -1.0
            for c in range(n):
                out[p, c] /= a
                if abs(out[p, c]) > qk:
                    qk = abs(out[p, c])
                    k = c
            face_val = out[p, k]
            out[p, k] = 0.0
            b = 0.0
            for c in range(n):
                if abs(out[p, c]) > b:
                    b = abs(out[p, c])
            if b == 0.0:
                b = 1.0
            for c in range(n):
                out[p, c] /= b
            out[p, k] = face_val
            for c in range(n):
                if to_dual:
                    ctr = eps * np.round(X[p, c] / eps)
                else:
                    ctr = eps * (np.floor(X[p, c] / eps) + 0.5)
                out[p, c] = ctr + out[p, c] * (eps / 2.0)

    def _cube_witness_nb(X, eps, to_dual):
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.empty_like(X)
        _cube_witness_nb_core(X, float(eps), bool(to_dual), out)
        return out

    class _NumbaBackend:
        name = "numba"
        join_batch = staticmethod(_join_batch_nb)
        pairwise_diameter = staticmethod(_pairwise_diameter_nb)
        group_diameters = staticmethod(_group_diameters_nb)
        cube_skeleton_dists = staticmethod(_cube_skeleton_dists_nb)
        cube_witness = staticmethod(_cube_witness_nb)

    numba_backend = _NumbaBackend()
    active_backend = numba_backend
else:
    numba_backend = None
    active_backend = numpy_backend


def get_backend(name: str | None = None):
    if name in (None, "auto"):
        return active_backend
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        if numba_backend is None:
            raise RuntimeError("numba backend unavailable (not installed or disabled)")
        return numba_backend
    raise ValueError(f"unknown backend {name!r}")


# convenience module-level wrappers using the active backend

def join_batch(X, h, d):
    return active_backend.join_batch(X, h, d)


def pairwise_diameter(P):
    return active_backend.pairwise_diameter(P)


def group_diameters(P, starts):
    return active_backend.group_diameters(P, starts)


def cube_skeleton_dists(X, eps):
    return active_backend.cube_skeleton_dists(X, eps)


def cube_witness(X, eps, to_dual):
    return active_backend.cube_witness(X, eps, to_dual)


def bin_indices(P: np.ndarray, delta: float):
    """Group points by the delta-grid cell of their coordinates.

    Returns (perm, starts): applying perm sorts points by bin; starts are
    group boundaries into the permuted array.
    """
    cells = np.floor(np.asarray(P, float) / delta).astype(np.int64)
    _, inverse = np.unique(cells, axis=0, return_inverse=True)
    perm = np.argsort(inverse, kind="stable")
    sorted_inv = inverse[perm]
    boundaries = np.flatnonzero(np.diff(sorted_inv)) + 1
    starts = np.concatenate(([0], boundaries, [len(P)]))
    return perm, starts
