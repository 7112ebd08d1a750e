#!/usr/bin/env python3
"""Benchmark the compiled extension core against the numpy fallback.

Times each hot kernel on representative shapes, then a small end-to-end
nested Clark-Ocone run on both backends. Usage:

    python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

import wfdensity._backend as backend
import wfdensity._purepy as purepy
from wfdensity.engine import MehlerConfig, NestedConfig, mehler_nodes, sde_samples
from wfdensity.models import make_preset, solve_sde
from wfdensity.quadrature import uniform_grid
from wfdensity.rng import normal_rows, substream
from wfdensity.volterra import VolterraKernel


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller shapes")
    args = parser.parse_args()

    if not backend.compiled_available():
        print("compiled core not built; nothing to compare")
        return 1

    import wfdensity._core as core

    scale = 4 if args.quick else 1
    grid = uniform_grid(1.0, 65)
    model = make_preset("sde-sine", grid)
    kernel = VolterraKernel(model.H)
    mats = kernel.matrices(grid)

    n_paths = 2048 // scale
    dW = normal_rows(1, 1, range(n_paths), grid.n_steps) \
        * np.sqrt(np.diff(grid.points))
    bh = purepy.bh_from_increments(mats.kbar, dW)
    gvals = 1.0 + 0.1 * substream(2, 9).standard_normal((n_paths, grid.n))

    X_m = substream(3, 9).standard_normal((1024 // scale, grid.n))
    Xc = substream(4, 9).standard_normal((64, grid.n))
    au, bu, wu = mehler_nodes(MehlerConfig(laguerre_nodes=32, n_copies=64))
    from wfdensity.functions import linear_plus_exp
    f1 = linear_plus_exp(1.0, 1.0, 1.0).diff()

    fresh = substream(5, 9).standard_normal((64 // scale, 128, grid.n_steps - 8))
    from wfdensity.models import solve_sde as _solve
    X_sde = _solve(model, kernel, dW[:64 // scale], grid)

    rows = []

    def bench(name, compiled_fn, python_fn):
        tc = timeit(compiled_fn)
        tp = timeit(python_fn)
        rows.append((name, tc, tp, tp / tc))

    bench("bh_from_increments",
          lambda: core.bh_from_increments(mats.kbar, dW),
          lambda: purepy.bh_from_increments(mats.kbar, dW))
    bench("euler_solve",
          lambda: core.euler_solve(grid.points, 1.0, bh, model.b.coeffs,
                                   model.sigma.coeffs),
          lambda: purepy.euler_solve(grid.points, 1.0, bh, model.b, model.sigma))
    bench("reduced_profiles",
          lambda: core.reduced_profiles(mats.W, gvals),
          lambda: purepy.reduced_profiles(mats.W, gvals))
    bench("mehler_psi",
          lambda: core.mehler_psi(X_m, Xc, au, bu, wu, f1.coeffs),
          lambda: purepy.mehler_psi(X_m, Xc, au, bu, wu, f1))
    bench("nested_conditional (j=8)",
          lambda: core.nested_conditional(dW[:64 // scale], X_sde, fresh, 8,
                                          grid.n_steps, grid.points, mats.kbar,
                                          np.asarray(mats.W[8]), kernel.c_H,
                                          model.b.coeffs, model.sigma.coeffs,
                                          None),
          lambda: purepy.nested_conditional(dW[:64 // scale], X_sde, fresh, 8,
                                            grid.n_steps, grid.points,
                                            mats.kbar, mats.W[8], kernel.c_H,
                                            model.b, model.sigma, None))

    def run_end_to_end(mode):
        backend.force_mode(mode)
        try:
            sde_samples(model, kernel, grid, 32 // scale + 2, seed=6,
                        nested_cfg=NestedConfig(n_sub=64, sub_seed=7))
        finally:
            backend.force_mode("auto")

    tc = timeit(lambda: run_end_to_end("compiled"), repeat=1)
    tp = timeit(lambda: run_end_to_end("python"), repeat=1)
    rows.append(("end-to-end nested sampling", tc, tp, tp / tc))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'compiled':>10}  {'python':>10}  {'speedup':>8}")
    for name, tc, tp, sp in rows:
        print(f"{name:<{width}}  {tc * 1e3:>8.2f}ms  {tp * 1e3:>8.2f}ms  {sp:>7.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
