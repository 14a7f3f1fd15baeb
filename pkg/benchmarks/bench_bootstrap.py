#!/usr/bin/env python3
"""Benchmark the bootstrap kernel: numba @njit vs the pure-numpy fallback.

Usage:
    python3 benchmarks/bench_bootstrap.py [--repeats N]

The numpy path is also what you get with CARDSMITH_NO_NUMBA=1. Both paths
must agree bit-for-bit; this script asserts that before timing.
"""

import argparse
import time

import numpy as np

from cardsmith import _kernels


def time_fn(fn, repeats, *args):
    fn(*args)  # warm-up (JIT compile / cache priming)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    cases = [
        ("small  (n=200,  K=2, B=1000)", 200, 2, 1000),
        ("card   (n=200,  K=3, B=2000)", 200, 3, 2000),
        ("large  (n=2000, K=5, B=5000)", 2000, 5, 5000),
    ]

    have_numba = _kernels.active_backend() == "numba"
    if not have_numba:
        print("numba unavailable or disabled; timing the numpy path only\n")

    print(f"{'case':<32}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, n, k, b in cases:
        rng = np.random.default_rng(1)
        t = rng.integers(0, k, size=n).astype(np.int64)
        p = rng.integers(0, k, size=n).astype(np.int64)

        t_numpy = time_fn(_kernels.bootstrap_stats_numpy, args.repeats, t, p, k, b, 42)
        if have_numba:
            assert np.array_equal(
                _kernels.bootstrap_stats_numba(t, p, k, b, 42),
                _kernels.bootstrap_stats_numpy(t, p, k, b, 42),
            ), "backend outputs diverged"
            t_numba = time_fn(_kernels.bootstrap_stats_numba, args.repeats, t, p, k, b, 42)
            print(f"{name:<32}{t_numpy * 1e3:>10.2f}ms{t_numba * 1e3:>10.2f}ms{t_numpy / t_numba:>9.1f}x")
        else:
            print(f"{name:<32}{t_numpy * 1e3:>10.2f}ms{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
