"""Benchmark the compiled kernels against the pure NumPy/SciPy fallback.

Runs the three hot kernel families (Cross-model DP sweep, synchronous
TASEP chunk, grid BFS) on identical inputs through both backends,
verifies the outputs match bit for bit, and prints timings.

Usage: python3 benchmarks/bench_backends.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from percotasep import _kernels_py
from percotasep import rng as rng_mod

try:
    from percotasep import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_cross_sweep(backend, closed, d0):
    return lambda: backend.cross_sweep_batch(closed, d0)


def bench_tasep(backend, occ0, uniforms):
    def run():
        occ = occ0.copy()
        return backend.tasep_chunk(occ, uniforms, 0.2, 0.2, 0.2)

    return run


def bench_bfs(backend, h_open, v_open):
    return lambda: backend.grid_bfs(h_open, v_open, 0, h_open.shape[1] // 2)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _kernels is None:
        raise SystemExit("compiled extension not built; nothing to compare")

    rng = rng_mod.stream(0)
    K, n, reps = 8, 200, 200
    closed = (rng.random((reps, n, 2 * K + 1)) < 0.2).astype(np.uint8)
    d0 = np.abs(np.arange(-K, K + 1, dtype=np.int64))

    occ0 = np.zeros(2 * 25, dtype=np.uint8)
    occ0[:25] = 1
    uniforms = rng.random((100_000, 2 * 25 + 1))

    w, h = 801, 401
    h_open = (rng.random((w - 1, h)) > 0.05).astype(np.uint8)
    v_open = (rng.random((w, h - 1)) > 0.05).astype(np.uint8)

    cases = [
        ("cross_sweep_batch (R=200, K=8, n=200)", bench_cross_sweep, (closed, d0)),
        ("tasep_chunk (K=25, 1e5 steps)", bench_tasep, (occ0, uniforms)),
        ("grid_bfs (801 x 401, eps=0.05)", bench_bfs, (h_open, v_open)),
    ]
    print(f"{'kernel':<42} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, factory, data in cases:
        t_py, out_py = _time(factory(_kernels_py, *data), args.repeat)
        t_c, out_c = _time(factory(_kernels, *data), args.repeat)
        assert np.array_equal(np.asarray(out_py), np.asarray(out_c)), name
        print(f"{name:<42} {t_py:>9.4f}s {t_c:>9.4f}s {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
