"""Benchmark the hot kernels: numba backend vs the pure-numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--sizes 20000,100000]

The same kernels power the big sample sweeps (join coordinates of 1e5
points per target value, binned witness-fiber diameters, cube skeleton
distances), so the speedup here is the speedup of the certification runs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from urywidth import _kernels as kern


def timeit(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(n_points: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    X3 = rng.uniform(-1, 1, size=(n_points, 3))
    rows = []
    backends = [("numpy", kern.numpy_backend)]
    if kern.numba_backend is not None:
        # trigger compilation outside the timed region
        kern.numba_backend.join_batch(X3[:64], 0.05, 1)
        kern.numba_backend.cube_skeleton_dists(X3[:64], 0.125)
        kern.numba_backend.cube_witness(X3[:64], 0.125, False)
        kern.numba_backend.group_diameters(X3[:64], np.array([0, 32, 64]))
        backends.append(("numba", kern.numba_backend))

    results = {}
    for name, be in backends:
        t_join, _ = timeit(be.join_batch, X3, 0.05, 1)
        t_cube, _ = timeit(be.cube_skeleton_dists, np.abs(X3), 0.125)
        t_wit, _ = timeit(be.cube_witness, np.abs(X3), 0.125, False)
        perm, starts = kern.bin_indices(X3, 0.05)
        t_diam, _ = timeit(be.group_diameters, X3[perm], starts)
        results[name] = dict(join=t_join, cube=t_cube, witness=t_wit,
                             diam=t_diam)
    for op in ("join", "cube", "witness", "diam"):
        row = [f"{op:8s}"]
        for name, _ in backends:
            row.append(f"{name}={results[name][op]*1e3:9.2f} ms")
        if len(backends) == 2:
            sp = results["numpy"][op] / results["numba"][op]
            row.append(f"speedup={sp:6.2f}x")
        rows.append("  ".join(row))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="20000,100000")
    args = ap.parse_args()
    print(f"active backend: {kern.active_backend.name} "
          f"(URYWIDTH_DISABLE_NUMBA toggles)")
    for size in (int(s) for s in args.sizes.split(",")):
        print(f"\nN = {size}")
        for row in bench(size):
            print("  " + row)


if __name__ == "__main__":
    main()
