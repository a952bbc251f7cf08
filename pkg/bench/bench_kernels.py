"""Throughput comparison of the compiled kernels against their numpy twins.

Run as a script::

    python bench/bench_kernels.py [--points 4000] [--grid 96] [--repeats 5]

Each kernel is timed on both backends with identical inputs; the compiled
path is JIT-warmed before timing so compilation cost is not counted.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pslab._accel import HAVE_NUMBA
from pslab._kernels import (
    _bargmann_sum_nb,
    _bargmann_sum_np,
    _max_cube_count_2axes_nb,
    _max_cube_count_2axes_np,
)


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return min(times), result


def bench_bargmann(grid_side: int, repeats: int):
    rng = np.random.default_rng(0)
    tpts = np.linspace(-6.0, 6.0, 512)
    weights = (rng.standard_normal(512) + 1j * rng.standard_normal(512)) * np.exp(
        -np.pi * tpts**2
    )
    axis = np.linspace(-2.0, 2.0, grid_side)
    rows = []
    t_np, ref = best_of(lambda: _bargmann_sum_np(tpts, weights, axis, axis), repeats)
    rows.append(("bargmann_sum", "numpy", t_np))
    if HAVE_NUMBA:
        _bargmann_sum_nb(tpts[:2], weights[:2], axis[:1], axis[:1])
        t_nb, out = best_of(lambda: _bargmann_sum_nb(tpts, weights, axis, axis), repeats)
        rows.append(("bargmann_sum", "numba", t_nb))
        err = np.abs(out - ref).max() / np.abs(ref).max()
        rows.append(("bargmann_sum", f"paths agree to {err:.2e}", None))
    return rows


def bench_cube_count(npoints: int, repeats: int):
    rng = np.random.default_rng(1)
    xs = rng.uniform(-20, 20, npoints)
    ys = rng.uniform(-20, 20, npoints)
    rows = []
    t_np, ref = best_of(lambda: _max_cube_count_2axes_np(xs, ys), repeats)
    rows.append(("max_cube_count", "numpy", t_np))
    if HAVE_NUMBA:
        _max_cube_count_2axes_nb(xs[:4], ys[:4])
        t_nb, out = best_of(lambda: _max_cube_count_2axes_nb(xs, ys), repeats)
        rows.append(("max_cube_count", "numba", t_nb))
        rows.append(("max_cube_count", f"paths agree: {out == ref}", None))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=4000, help="point count for the cube sweep")
    parser.add_argument("--grid", type=int, default=96, help="evaluation grid side for the quadrature")
    parser.add_argument("--repeats", type=int, default=5, help="timed repeats (best is reported)")
    args = parser.parse_args()

    if not HAVE_NUMBA:
        print("numba is not importable; timing the numpy path only")
    rows = bench_bargmann(args.grid, args.repeats) + bench_cube_count(args.points, args.repeats)
    for kernel, backend, elapsed in rows:
        if elapsed is None:
            print(f"{kernel:16s} {backend}")
        else:
            print(f"{kernel:16s} {backend:6s} {elapsed * 1e3:9.2f} ms")


if __name__ == "__main__":
    main()
