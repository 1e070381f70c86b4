#!/usr/bin/env python3
"""Throughput comparison of the compiled kernels against the pure-Python
fallback.

Both backends consume identical pregenerated random-number arrays, so
their outputs are bit-identical; only the step rate differs.  Run with

    python3 benchmarks/bench_kernels.py [--steps N]
"""

import argparse
import time

import numpy as np

from rfunravel.kernels import _pyref

try:
    from rfunravel.kernels import _sse as _compiled
except ImportError:
    _compiled = None


def bench_sse(mod, n_steps, noise):
    record = np.empty((n_steps // 100, 3))
    t0 = time.perf_counter()
    mod.sse_trajectory(
        1.0, 10.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1e-3, noise,
        1.0, 0.0, 0.0, 0.0, 100, record,
    )
    return time.perf_counter() - t0


def bench_adaptive(mod, n_steps, uniforms):
    record = np.empty((n_steps // 100, 4))
    jbuf = np.empty(n_steps, dtype=np.int64)
    t0 = time.perf_counter()
    mod.adaptive_trajectory(
        1.0, 10.0, 1e-3, uniforms, 1.0, 0.0, 0.0, 0.0, 0.5, 100, record, jbuf
    )
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=2_000_000)
    parser.add_argument("--python-steps", type=int, default=200_000,
                        help="step count for the (slower) pure-Python backend")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'backend':<10}{'steps':>12}{'time':>10}{'ns/step':>10}")

    for name, bench, gen in (
        ("sse_trajectory", bench_sse,
         lambda n: rng.standard_normal(size=(n, 2))),
        ("adaptive_trajectory", bench_adaptive,
         lambda n: rng.uniform(size=n)),
    ):
        if _compiled is not None:
            n = args.steps
            dt = bench(_compiled, n, gen(n))
            print(f"{name:<22}{'compiled':<10}{n:>12}{dt:>9.3f}s{1e9*dt/n:>10.1f}")
        n = args.python_steps
        dt = bench(_pyref, n, gen(n))
        print(f"{name:<22}{'python':<10}{n:>12}{dt:>9.3f}s{1e9*dt/n:>10.1f}")

    if _compiled is None:
        print("\ncompiled backend not built; showing the fallback only")


if __name__ == "__main__":
    main()
