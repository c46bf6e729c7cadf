"""Compare the compiled and pure-Python kernel backends.

Checks that both backends return identical results on the same inputs,
then times each kernel and the full generate/rank/explain pass.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--seed 0]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from greenconstraints import kernels
from greenconstraints.bench import run_case
from greenconstraints.kernels import threshold_rank

PAIR_SHAPES = [(300, 5), (30, 1000), (300, 100)]
SELECT_SIZES = [10_000, 100_000]
CASES = [(1000, 5), (10, 1000), (100, 100)]


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def inputs(rows: int, cols: int, rng: np.random.Generator):
    energy = rng.uniform(10, 2000, rows)
    carbon = rng.uniform(16, 600, cols)
    compat = rng.random((rows, cols)) > 0.1
    return energy, carbon, compat


def check_parity(native: kernels.Kernels, rng: np.random.Generator) -> None:
    py = kernels.PYTHON
    for rows, cols in PAIR_SHAPES:
        e, c, m = inputs(rows, cols, rng)
        a = [np.asarray(x) for x in native.pair_impacts(e, c, m.tolist())]
        b = [np.asarray(x) for x in py.pair_impacts(e.tolist(), c.tolist(), m.tolist())]
        for x, y in zip(a, b):
            if not np.array_equal(x, y):
                sys.exit(f"pair_impacts mismatch at shape {rows}x{cols}")
    for n in SELECT_SIZES:
        v = rng.uniform(0, 1e6, n)
        # include ties so the partition's equal-key path is exercised
        v[: n // 10] = v[0]
        for alpha in (0.5, 0.8, 0.9):
            k = threshold_rank(n, alpha)
            if native.kth_smallest(v, k) != py.kth_smallest(v.tolist(), k):
                sys.exit(f"kth_smallest mismatch at n={n}, alpha={alpha}")
    print("parity: identical results on all inputs")


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    native = kernels.NATIVE
    if native is None:
        print("compiled backend not built; run `python3 setup.py build_ext --inplace` first")
        return 1
    rng = np.random.default_rng(args.seed)
    check_parity(native, rng)

    print(f"\n{'kernel':<28}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    for rows, cols in PAIR_SHAPES:
        e, c, m = inputs(rows, cols, rng)
        el, cl, ml = e.tolist(), c.tolist(), m.tolist()
        tn = best_of(lambda: native.pair_impacts(el, cl, ml), args.repeat)
        tp = best_of(lambda: kernels.PYTHON.pair_impacts(el, cl, ml), args.repeat)
        print(f"{f'pair_impacts {rows}x{cols}':<28}{tn:>12.5f}{tp:>12.5f}{tp / tn:>10.1f}")
    for n in SELECT_SIZES:
        v = rng.uniform(0, 1e6, n)
        vl = v.tolist()
        k = threshold_rank(n, 0.8)
        tn = best_of(lambda: native.kth_smallest(vl, k), args.repeat)
        tp = best_of(lambda: kernels.PYTHON.kth_smallest(vl, k), args.repeat)
        print(f"{f'kth_smallest n={n}':<28}{tn:>12.5f}{tp:>12.5f}{tp / tn:>10.1f}")

    print(f"\n{'end-to-end':<28}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    for s, n in CASES:
        rn = run_case(s, n, args.seed, kernels=native)
        rp = run_case(s, n, args.seed, kernels=kernels.PYTHON)
        if rn.counts != rp.counts or rn.ranked != rp.ranked:
            sys.exit(f"end-to-end mismatch at {s}x{n}")
        print(f"{f'{s} services x {n} nodes':<28}{rn.seconds:>12.4f}{rp.seconds:>12.4f}{rp.seconds / rn.seconds:>10.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
