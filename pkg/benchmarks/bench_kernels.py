#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the hot paths on representative workloads and prints one row per
kernel.  Run after building the extension:

    python benchmarks/bench_kernels.py
"""
import math
import time

import numpy as np

from sesid._kernels import pyloop

try:
    from sesid._kernels import _core as core
except ImportError:
    core = None


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads():
    rng = np.random.default_rng(0)
    c = np.arange(-10.0, 11.0)
    vals = 2.5 * np.tanh(1.2 * c / 2.5)
    mu = np.empty(22)
    mu[1:-1] = np.diff(vals)
    mu[0], mu[-1] = mu[1], mu[-2]
    u = np.ascontiguousarray(rng.normal(scale=4.0, size=200_000))

    a = np.array([-1.6, 0.8])
    b = np.array([1.0, -0.5])
    v = np.ascontiguousarray(rng.normal(5.0, 1.2, size=100_000))
    y_init = np.ascontiguousarray(rng.normal(size=7))

    phi = np.ascontiguousarray(rng.normal(size=(4000, 120)))
    y_r = np.ascontiguousarray(rng.normal(size=4000))
    theta0 = np.zeros(120)

    return {
        "cpl_eval_many (200k pts)": lambda m: m.cpl_eval_many(c, mu, 11, 0.0, u),
        "eta_matrix (200k rows)": lambda m: m.eta_matrix(c, 11, u),
        "simulate_dttdl_cpl (100k steps)": lambda m: m.simulate_dttdl_cpl(
            a, b, 7.5, 4, v, y_init, c, mu, 11, 0.0, 1e12
        ),
        "rls_solve (4000 x 120)": lambda m: m.rls_solve(phi, y_r, theta0, 1e4, 1.0),
        "van_der_pol RK4 (1M steps)": lambda m: m.integrate_van_der_pol(
            1.0, 0.1, 0.0, 1e-3, 1_000_000
        ),
        "lotka_volterra RK4 (1M steps)": lambda m: m.integrate_lotka_volterra(
            2.0 / 3.0, 4.0 / 3.0, 1.0, 1.0, 1.0, 1.0, 1e-3, 1_000_000
        ),
    }


def main():
    rows = []
    for name, fn in workloads().items():
        t_py = best_of(lambda: fn(pyloop))
        if core is not None:
            t_c = best_of(lambda: fn(core))
            rows.append((name, t_py, t_c, t_py / t_c))
        else:
            rows.append((name, t_py, math.nan, math.nan))

    width = max(len(r[0]) for r in rows)
    header = f"{'kernel':<{width}}  {'python':>9}  {'compiled':>9}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, t_py, t_c, speedup in rows:
        compiled = f"{t_c * 1e3:8.1f}ms" if not math.isnan(t_c) else "      n/a"
        ratio = f"{speedup:7.1f}x" if not math.isnan(speedup) else "     n/a"
        print(f"{name:<{width}}  {t_py * 1e3:8.1f}ms  {compiled}  {ratio}")
    if core is None:
        print("\n(compiled extension not available; showing fallback only)")


if __name__ == "__main__":
    main()
