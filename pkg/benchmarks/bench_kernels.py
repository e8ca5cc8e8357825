#!/usr/bin/env python3
"""Benchmark the compiled chain kernels against the NumPy fallback.

Run:  python benchmarks/bench_kernels.py [--horizon 50000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from smoothtrack import kernels


def bench(fn, n, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best, n / best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--horizon", type=int, default=50_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    impls = kernels.available_implementations()
    if "compiled" not in impls:
        print("compiled extension not built; benchmarking fallback only")

    rng = np.random.default_rng(0)
    rows = []
    for d in (1, 8):
        T = args.horizon
        tau = rng.uniform(0, 1, (T, d))
        u = rng.uniform(0, 1, (T, d))
        uhat = rng.uniform(0, 1, (T, d))
        lo, hi = np.zeros(d), np.ones(d)
        cases = {
            "greedy": lambda m: m.greedy_chain(tau, u, 0.9, 12, 0.1, lo, hi),
            "best": lambda m: m.best_chain(tau, u, 0.9, 12, 0.1, lo, hi),
            "cort": lambda m: m.cort_chain(tau, u, uhat, 0.5, 0.9, 12, 0.1,
                                           lo, hi),
        }
        for name, call in cases.items():
            timing = {}
            for impl_name, mod in impls.items():
                secs, rate = bench(lambda: call(mod), T, args.repeats)
                timing[impl_name] = (secs, rate)
            speedup = (timing["python"][0] / timing["compiled"][0]
                       if "compiled" in timing else float("nan"))
            rows.append((name, d, timing, speedup))

    print(f"\nchain kernels, horizon={args.horizon}")
    print(f"{'kernel':<8} {'d':>2} {'python':>12} {'compiled':>12} {'speedup':>8}")
    for name, d, timing, speedup in rows:
        py = f"{timing['python'][0] * 1e3:9.1f} ms"
        cy = (f"{timing['compiled'][0] * 1e3:9.1f} ms"
              if "compiled" in timing else "        n/a")
        print(f"{name:<8} {d:>2} {py:>12} {cy:>12} {speedup:>7.1f}x")


if __name__ == "__main__":
    main()
