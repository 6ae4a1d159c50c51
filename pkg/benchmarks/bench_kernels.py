#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-numpy fallback.

Shapes mirror the real workloads: stage-1 volume assembly tables for
degrees 1..3 and interior-edge value tables.  Run as

    python benchmarks/bench_kernels.py [--elements N] [--repeats R]
"""

import argparse
import time

import numpy as np

from ndfem._kernels import _numpy_impl

try:
    from ndfem._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(n_elements, m):
    rng = np.random.default_rng(0)
    nb = (m + 2) * (m + 3) // 2 - 1
    nq_vol = {1: 96, 2: 150, 3: 216}[m]  # volume rule sizes for 2m+4
    nq_edge = m + 2
    exps = np.array(
        [(a, d - a) for d in range(1, m + 2) for a in range(d, -1, -1)], dtype=np.int64
    )
    X = rng.standard_normal((n_elements, nq_vol))
    Y = rng.standard_normal((n_elements, nq_vol))
    inv = rng.random(n_elements) + 0.5
    AH = rng.standard_normal((n_elements, nq_vol, nb, 1))
    w = rng.random((n_elements, nq_vol))
    Fe = rng.standard_normal((n_elements, nq_edge, nb, 2))
    we = rng.random((n_elements, nq_edge))
    return {
        f"basis_tab      m={m}": lambda impl: impl.basis_tab(exps, X, Y, inv, True),
        f"volume gram    m={m}": lambda impl: impl.weighted_gram(AH, AH, w),
        f"edge gram      m={m}": lambda impl: impl.weighted_gram(Fe, Fe, we),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--elements", type=int, default=8000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if _core is None:
        print("compiled kernels not built; showing numpy timings only")
    print(f"{'kernel':24s} {'numpy [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for m in (1, 2, 3):
        for name, call in workloads(args.elements, m).items():
            t_np = timeit(lambda: call(_numpy_impl), args.repeats)
            if _core is not None:
                # parity before speed
                ref = call(_numpy_impl)
                got = call(_core)
                ref0 = ref[0] if isinstance(ref, tuple) else ref
                got0 = got[0] if isinstance(got, tuple) else got
                assert np.allclose(ref0, got0, rtol=1e-12, atol=1e-12 * np.abs(ref0).max())
                t_c = timeit(lambda: call(_core), args.repeats)
                print(
                    f"{name:24s} {1e3 * t_np:12.2f} {1e3 * t_c:14.2f} "
                    f"{t_np / t_c:7.2f}x"
                )
            else:
                print(f"{name:24s} {1e3 * t_np:12.2f} {'-':>14s} {'-':>8s}")


if __name__ == "__main__":
    main()
