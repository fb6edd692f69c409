"""Benchmark the sigmoid component kernels: active backend vs pure numpy.

The subsampled oracle's cost is dominated by averaging component values,
gradients and Hessians over index sets.  This script times both code paths
on a synthetic dataset; run with DYNREG_BACKEND=numpy to see the fallback
as the active backend.

    python3 benchmarks/bench_kernels.py --N 10000 --n 20
"""

import argparse
import time

import numpy as np

from dynreg import _kernels
from dynreg.problems import make_synthetic_dataset


def best_of(fn, args, repeat):
    fn(*args)  # warm up (JIT compile / cache touch)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N", type=int, default=10_000)
    parser.add_argument("--n", type=int, default=20)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    ds = make_synthetic_dataset(args.N, args.n, seed=0)
    x = np.full(args.n, 0.1)
    rng = np.random.default_rng(1)
    index_sets = {
        "m=1000": rng.integers(0, args.N, size=1000, dtype=np.int64),
        f"m=N={args.N}": np.arange(args.N, dtype=np.int64),
    }
    pairs = [
        ("value", _kernels.value_sum, _kernels._value_sum_py),
        ("grad", _kernels.grad_sum, _kernels._grad_sum_py),
        ("hess", _kernels.hess_sum, _kernels._hess_sum_py),
    ]

    print(f"active backend: {_kernels.backend()}  (N={args.N}, n={args.n})")
    header = f"{'kernel':8s} {'indices':>12s} {'active (ms)':>12s} {'numpy (ms)':>12s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for label, idx in index_sets.items():
        for name, active, fallback in pairs:
            t_active = best_of(active, (ds.features, ds.labels, x, idx), args.repeat)
            t_numpy = best_of(fallback, (ds.features, ds.labels, x, idx), args.repeat)
            print(
                f"{name:8s} {label:>12s} {1e3 * t_active:12.3f} {1e3 * t_numpy:12.3f} "
                f"{t_numpy / t_active:8.2f}x"
            )


if __name__ == "__main__":
    main()
