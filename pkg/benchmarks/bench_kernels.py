"""Compare the numba and numpy kernel paths.

    python3 benchmarks/bench_kernels.py [--repeat N]

Workloads: the brute-force order batch over gcd(x, M) = 1, M <= 5000,
x <= 50, and the cyclic power table of n^phi(m) modulo a few large m^k.
"""

import argparse
import time
from math import gcd

import numpy as np

from coprime_adic import kernels
from coprime_adic.modarith import totient


def order_workload():
    pairs = [(x, M) for M in range(2, 5001) for x in range(1, 51) if gcd(x, M) == 1]
    xs, ms = (np.array(col, dtype=np.int64) for col in zip(*pairs))
    return xs, ms


def power_workload():
    # (m, n, k): generator n^phi(m) modulo m^k
    cases = [(3, 2, 13), (5, 2, 9), (7, 3, 7), (4, 3, 10)]
    return [(pow(n, totient(m), m**k), m**k) for m, n, k in cases]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return min(times), result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.njit is None:
        print("numba is not installed; only the numpy path is available")
    paths = [False] + ([True] if kernels.njit is not None else [])

    xs, ms = order_workload()
    if True in paths:  # warm the JIT cache outside the timing
        kernels.order_batch(xs[:4], ms[:4], use_numba=True)
        kernels.cyclic_powers(2, 9, use_numba=True)

    print(f"order_batch: {len(xs)} pairs")
    ref = None
    for use in paths:
        sec, out = best_of(lambda: kernels.order_batch(xs, ms, use_numba=use), args.repeat)
        ref = out if ref is None else ref
        assert np.array_equal(out, ref)
        print(f"  {'numba' if use else 'numpy':5s} {sec * 1e3:9.1f} ms")

    for g, M in power_workload():
        print(f"cyclic_powers: g={g} M={M}")
        ref = None
        for use in paths:
            sec, out = best_of(lambda: kernels.cyclic_powers(g, M, cap=10**7, use_numba=use), args.repeat)
            ref = out if ref is None else ref
            assert np.array_equal(out, ref)
            print(f"  {'numba' if use else 'numpy':5s} {sec * 1e3:9.1f} ms  (order {len(out)})")


if __name__ == "__main__":
    main()
