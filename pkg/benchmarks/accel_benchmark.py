"""Timing comparison: compiled hot kernels vs their pure-NumPy fallbacks.

The three loop-heavy kernels (Jacobi eigensweeps, coordinate descent, the
simulation recursion) each ship in two forms — a numba-compiled version and
the plain fallback used when ``KGRANGER_DISABLE_NUMBA=1`` or numba is
missing.  This script times both forms in one process on representative
workloads and checks that they agree numerically.

Usage: python benchmarks/accel_benchmark.py [--repeats 5]
"""
import argparse
import time

import numpy as np

from kgranger._accel import NUMBA_ENABLED
from kgranger.linalg import (
    _jacobi_sweeps_jit,
    _jacobi_sweeps_loops,
    _jacobi_sweeps_numpy,
)
from kgranger.regression import _cd_sweeps, _cd_sweeps_jit
from kgranger.synthgen import _recurse, _recurse_jit


def best_ms(func, make_args, repeats):
    """Best-of-N wall time in milliseconds; fresh arguments per call."""
    best = np.inf
    out = None
    for _ in range(repeats):
        args = make_args()
        t0 = time.perf_counter()
        out = func(*args)
        best = min(best, (time.perf_counter() - t0) * 1e3)
    return best, out


def bench_jacobi(repeats):
    rng = np.random.default_rng(0)
    base = rng.standard_normal((96, 96))
    sym = (base + base.T) / 2.0

    def args():
        return sym.copy(), np.eye(96), 1e-10, 60

    fast = _jacobi_sweeps_jit if _jacobi_sweeps_jit is not None else None
    slow_ms, slow_out = best_ms(_jacobi_sweeps_numpy, args, repeats)
    if fast is None:
        return "jacobi sweeps (96x96)", None, slow_ms, True
    fast(*args())  # compile before the clock starts
    fast_ms, fast_out = best_ms(fast, args, repeats)
    agree = fast_out[2] == slow_out[2] and abs(fast_out[1] - slow_out[1]) < 1e-8
    return "jacobi sweeps (96x96)", fast_ms, slow_ms, agree


def bench_cd(repeats):
    rng = np.random.default_rng(1)
    x = rng.standard_normal((400, 60))
    y = rng.standard_normal((400, 3))
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    g = xc.T @ xc / 400.0
    c = xc.T @ yc / 400.0

    def args():
        return g, c, 0.02, 0.0, 1e-10, 10000

    slow_ms, slow_out = best_ms(_cd_sweeps, args, repeats)
    if _cd_sweeps_jit is None:
        return "coordinate descent (60 cols)", None, slow_ms, True
    _cd_sweeps_jit(*args())
    fast_ms, fast_out = best_ms(_cd_sweeps_jit, args, repeats)
    agree = np.allclose(fast_out[0], slow_out[0], atol=1e-12)
    return "coordinate descent (60 cols)", fast_ms, slow_ms, agree


def bench_recurse(repeats):
    rng = np.random.default_rng(2)
    n_nodes, n_edges, total = 8, 10, 20000
    auto = np.full(n_nodes, 0.3)
    src = rng.integers(0, n_nodes, size=n_edges).astype(np.int64)
    dst = (src + 1 + rng.integers(0, n_nodes - 1, size=n_edges)) % n_nodes
    lag = rng.integers(1, 4, size=n_edges).astype(np.int64)
    weight = rng.uniform(0.2, 0.4, size=n_edges)
    kind = rng.integers(0, 2, size=n_edges).astype(np.int64)
    noise = rng.normal(0.0, 0.5, size=(total, n_nodes))

    def args():
        return auto, src, dst.astype(np.int64), lag, weight, kind, 2, noise, 1e4

    slow_ms, slow_out = best_ms(_recurse, args, repeats)
    if _recurse_jit is None:
        return "simulation recursion (20k x 8)", None, slow_ms, True
    _recurse_jit(*args())
    fast_ms, fast_out = best_ms(_recurse_jit, args, repeats)
    agree = fast_out[1] == slow_out[1] and np.allclose(
        fast_out[0], slow_out[0], atol=1e-10
    )
    return "simulation recursion (20k x 8)", fast_ms, slow_ms, agree


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of-N timing")
    opts = parser.parse_args()

    print(f"numba enabled: {NUMBA_ENABLED}")
    if not NUMBA_ENABLED:
        print("(set KGRANGER_DISABLE_NUMBA=0 / install numba for the compiled side)")
    print(f"{'kernel':32} {'compiled':>10} {'fallback':>10} {'speedup':>8}  match")
    for bench in (bench_jacobi, bench_cd, bench_recurse):
        name, fast_ms, slow_ms, agree = bench(opts.repeats)
        if fast_ms is None:
            print(f"{name:32} {'-':>10} {slow_ms:9.2f}ms {'-':>8}  {agree}")
        else:
            print(
                f"{name:32} {fast_ms:9.2f}ms {slow_ms:9.2f}ms "
                f"{slow_ms / fast_ms:7.1f}x  {agree}"
            )
    # _jacobi_sweeps_loops is the uncompiled source of the jit kernel; it is
    # deliberately not timed (pure-Python triple loops, minutes at this size)
    assert _jacobi_sweeps_loops is not None


if __name__ == "__main__":
    main()
