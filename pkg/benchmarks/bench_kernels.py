"""Compare the jit and numpy kernel backends on representative workloads.

Run as: python3 benchmarks/bench_kernels.py [--repeat N]

Both backends are imported regardless of AOICLOCK_NO_NUMBA so the table
always shows the full comparison; the flag only selects what the package
itself dispatches to.
"""

import argparse
import time

import numpy as np

from aoiclock import kernels
from aoiclock.simulate import bernoulli_threshold
from fractions import Fraction


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if "numba" not in kernels.IMPLS:
        raise SystemExit("numba backend unavailable; nothing to compare")

    thr = bernoulli_threshold(Fraction(1, 2))
    workloads = [
        ("seq_basic 1e6", "seq_basic", (34, 7, 10, 0, 10**6)),
        ("seq_conditional 1e6", "seq_conditional", (34, 7, 10, 3, 5, 2, 0, 10**6)),
        ("period_sums 500 terms", "period_sums_conditional", (34, 7, 10, 3, 5, 500, 35)),
        ("sim_basic 1e6 cycles", "sim_basic", (34, 7, 10, 10**6)),
        ("sim_extended 1e6 cycles", "sim_extended",
         (34, 7, 10, 3, 5, thr, np.uint64(42), 10**6)),
    ]

    rows = []
    for label, name, argv in workloads:
        per_backend = {}
        for backend in ("numpy", "numba"):
            fn = kernels.IMPLS[backend][name]
            fn(*argv)  # warm-up: jit compile, page in
            per_backend[backend] = best_of(lambda: fn(*argv), args.repeat)
        rows.append((label, per_backend["numpy"], per_backend["numba"]))

    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'numpy':>10}  {'numba':>10}  {'ratio':>7}")
    for label, t_np, t_nb in rows:
        print(f"{label:<{width}}  {t_np * 1e3:>8.2f}ms  {t_nb * 1e3:>8.2f}ms  "
              f"{t_np / t_nb:>6.1f}x")
    print(f"\nactive package backend: {kernels.backend()}  (best of {args.repeat})")


if __name__ == "__main__":
    main()
