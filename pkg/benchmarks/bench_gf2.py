#!/usr/bin/env python3
"""Benchmark the GF(2) rank kernels: numba @njit vs the pure-numpy fallback.

The rank kernel dominates the verification battery (every conditional
entropy is a rank query), so this is the number that matters. Run after
installing the package:

    python3 benchmarks/bench_gf2.py [--repeats 5]

The same comparison can be forced package-wide with SMOOTHLDC_BACKEND=numpy.
"""

import argparse
import time

import numpy as np

from smoothldc import _kernels
from smoothldc.construct import build_sldc
from smoothldc.entropy import RankOracle


def bench_raw_ranks(rank_fn, matrices, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        acc = 0
        for m in matrices:
            acc += rank_fn(m.copy())
        best = min(best, time.perf_counter() - start)
    return best, acc


def bench_entropy_sweep(code, repeats):
    """Exhaustive pairwise entropy queries, the shape of the property
    battery, with a fresh (uncached) oracle per run."""
    p = code.params
    best = float("inf")
    for _ in range(repeats):
        oracle = RankOracle(code)
        start = time.perf_counter()
        for i in range(p.M):
            for j in range(i, p.M):
                for k in range(1, p.K + 1):
                    oracle.entropy((i, j), (k,))
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    matrices = [
        rng.integers(0, 2**63, size=(rows, words), dtype=np.int64).astype(np.uint64)
        for rows, words in [(54, 3), (81, 3), (128, 9), (256, 16)]
        for _ in range(50)
    ]
    # warm the jit cache before timing
    _kernels.rank_words_numba(matrices[0].copy())

    print(f"{'workload':<34}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    t_nb, acc_nb = bench_raw_ranks(_kernels.rank_words_numba, matrices, args.repeats)
    t_np, acc_np = bench_raw_ranks(_kernels.rank_words_numpy, matrices, args.repeats)
    assert acc_nb == acc_np
    print(f"{'200 packed ranks (mixed sizes)':<34}{t_nb:>11.4f}s{t_np:>11.4f}s{t_np / t_nb:>9.1f}x")

    for n, k in [(2, 3), (3, 3), (4, 2)]:
        code = build_sldc(n, k)
        saved = _kernels.rank_words
        try:
            _kernels.rank_words = _kernels.rank_words_numba
            import smoothldc.entropy as entropy_mod

            entropy_mod.rank_words = _kernels.rank_words_numba
            t_nb = bench_entropy_sweep(code, args.repeats)
            entropy_mod.rank_words = _kernels.rank_words_numpy
            t_np = bench_entropy_sweep(code, args.repeats)
        finally:
            _kernels.rank_words = saved
            entropy_mod.rank_words = saved
        label = f"pairwise entropies, N={n} K={k}"
        print(f"{label:<34}{t_nb:>11.4f}s{t_np:>11.4f}s{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
