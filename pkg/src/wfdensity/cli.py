"""Command-line interface.

Subcommands map onto the acceptance surfaces:

* run:             execute any experiment config, write outputs.
* validate-kernel: kernel identity and normalization-constant suite.
* gaussian-sanity: linear preset against the exact normal density.
* presets:         print the built-in experiment configurations.
"""

import argparse
import json
import sys

import numpy as np

from .errors import (ConfigError, DegenerateSampleError, ModelViolationError,
                     NumericalBlowupError, NumericDegeneracyError,
                     RegressionFailureError, WfdensityError)
from .experiment import (EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_NUMERICAL,
                         ExperimentConfig, emit_outputs, preset_config,
                         run_experiment)
from .parallel import resolve_threads

C_H_075_FIXTURE = 0.2674111587579976


def _write_error_record(out_dir, exc, exit_code):
    from pathlib import Path
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record = {"error_class": type(exc).__name__, "message": str(exc),
              "exit_code": exit_code}
    step = getattr(exc, "step", None)
    if step is not None:
        record["step"] = step
    (out / "error.json").write_text(json.dumps(record, indent=2,
                                               sort_keys=True) + "\n")


def _cmd_run(args):
    try:
        cfg = ExperimentConfig.from_json_file(args.config)
        if args.seed is not None:
            raw = cfg.to_dict()
            raw["seed"] = args.seed
            cfg = ExperimentConfig.from_dict(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    threads = resolve_threads(args.threads)
    try:
        report = run_experiment(cfg, threads=threads)
    except (ModelViolationError, DegenerateSampleError) as exc:
        _write_error_record(args.out, exc, EXIT_HYPOTHESIS)
        print(f"hypothesis breach: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (NumericalBlowupError, NumericDegeneracyError,
            RegressionFailureError) as exc:
        _write_error_record(args.out, exc, EXIT_NUMERICAL)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = emit_outputs(report, args.out)
    for rec in report.audits.to_list():
        status = "pass" if rec["passed"] else "FAIL"
        print(f"audit {rec['hypothesis']}: {status} "
              f"({rec['violations']}/{rec['checked']} violations)")
    for rep in report.violation_reports:
        status = "pass" if rep.passed else "FAIL"
        print(f"envelope check [{rep.method_tag}]: {status} "
              f"({len(rep.violations)} violations, slack {rep.slack})")
    print(f"outputs written to {out}")
    return report.exit_code


def _cmd_validate_kernel(args):
    from .volterra import VolterraKernel, c_H_constant
    failures = 0
    c_val = c_H_constant(0.75)
    ok = abs(c_val - C_H_075_FIXTURE) <= 1e-3
    failures += 0 if ok else 1
    print(f"c_H(0.75) = {c_val:.10f} vs fixture {C_H_075_FIXTURE:.10f} "
          f"[{'pass' if ok else 'FAIL'}]")
    for H in (0.6, 0.75, 0.9):
        kernel = VolterraKernel(H)
        for t in (0.5, 1.0):
            val = kernel.sq_integral(t, n_cells=512)
            target = t ** (2 * H)
            rel = abs(val - target) / target
            ok = rel <= 1e-3
            failures += 0 if ok else 1
            print(f"H={H} t={t}: int K^2 = {val:.8f} target {target:.8f} "
                  f"rel_err {rel:.2e} [{'pass' if ok else 'FAIL'}]")
    if failures:
        print(f"{failures} kernel checks failed", file=sys.stderr)
        return EXIT_NUMERICAL
    print("kernel identity suite: all pass")
    return 0


def _cmd_gaussian_sanity(args):
    cfg = ExperimentConfig.from_dict(preset_config("linear"))
    threads = resolve_threads(args.threads)
    report = run_experiment(cfg, threads=threads)
    x = report.x_grid
    est = report.densities["nourdin_viens"].values
    phi = np.exp(-x ** 2 / 2) / np.sqrt(2 * np.pi)
    err = float(np.max(np.abs(est - phi)))
    ok = err <= 0.02
    print(f"max |nourdin_viens - normal density| on [{x[0]:g}, {x[-1]:g}] = "
          f"{err:.5f} [{'pass' if ok else 'FAIL'}]")
    if args.out:
        emit_outputs(report, args.out)
        print(f"outputs written to {args.out}")
    return 0 if ok else 2


def _cmd_presets(args):
    from .experiment import ADDITIVE_PRESETS, SDE_PRESETS
    names = ("linear",) + ADDITIVE_PRESETS + SDE_PRESETS
    print(json.dumps({name: preset_config(name) for name in names}, indent=2,
                     sort_keys=True))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wfdensity",
        description="Density estimation and Gaussian envelope certification "
                    "for Wiener functionals")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True, help="JSON config path")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: WFDENSITY_THREADS or 1)")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.set_defaults(func=_cmd_run)

    p_vk = sub.add_parser("validate-kernel",
                          help="kernel identity and constant checks")
    p_vk.set_defaults(func=_cmd_validate_kernel)

    p_gs = sub.add_parser("gaussian-sanity",
                          help="linear preset vs the exact normal density")
    p_gs.add_argument("--out", default=None, help="optional output directory")
    p_gs.add_argument("--threads", type=int, default=None)
    p_gs.set_defaults(func=_cmd_gaussian_sanity)

    p_pr = sub.add_parser("presets", help="print built-in configurations")
    p_pr.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WfdensityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
