"""Configuration-driven experiment runner.

Wires models -> engine -> regression -> reconstruction -> envelope
checks with deterministic seeding, and serializes results to CSV/JSON.
Identical configs produce byte-identical density/violations/diagnostics
files at any thread count; wall-clock timings go to a separate file
outside that contract.

Exit codes: 0 pass, 2 envelope violation, 3 hypothesis breach,
4 numerical failure, 5 config error.
"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .audit import AuditSet
from .density import (BoundCertificate, check_envelope, exponential_density,
                      gaussian_envelopes, indicator_density_curve, kde_density,
                      nourdin_viens_density, sandwich_envelopes)
from .engine import (MehlerConfig, NestedConfig, additive_samples,
                     sde_correction_bound, sde_samples)
from .errors import ConfigError
from .gaussian_process import path_rows, sigma_T_squared
from .models import centering_prepass, make_preset
from .parallel import map_blocks
from .quadrature import uniform_grid
from .regression import silverman_bandwidth
from .volterra import VolterraKernel

EXIT_PASS = 0
EXIT_ENVELOPE = 2
EXIT_HYPOTHESIS = 3
EXIT_NUMERICAL = 4
EXIT_CONFIG = 5

SCHEMA_VERSION = 1

ADDITIVE_PRESETS = ("additive-linear", "additive-exp", "additive-concave")
SDE_PRESETS = ("sde-sine", "sde-custom")
COLUMN_ORDER = ("nourdin_viens", "new_repr", "clark_ocone", "indicator", "kde")


@dataclass
class ExperimentConfig:
    """Validated experiment description; see `preset_config` for defaults."""

    preset: str
    seed: int
    T: float = 1.0
    grid_n: int = 101
    n_paths: int = 10_000
    n_paths_kde: int = None
    params: dict = field(default_factory=dict)
    laguerre_nodes: int = 32
    n_copies: int = 64
    n_sub: int = 128
    prepass_factor: int = 10
    x_min: float = -3.0
    x_max: float = 3.0
    x_n: int = 121
    x_auto: bool = False
    x_half_width_sds: float = 4.0
    slack: float = 0.1
    envelope_quantiles: tuple = (0.025, 0.975)
    jacobi_nodes: int = 24
    eval_index: int = None

    def __post_init__(self):
        if self.preset not in ("linear",) + ADDITIVE_PRESETS + SDE_PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.seed is None:
            raise ConfigError("a seed is required")
        for name in ("grid_n", "n_paths", "laguerre_nodes", "n_copies", "n_sub",
                     "prepass_factor", "x_n", "jacobi_nodes"):
            if int(getattr(self, name)) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.grid_n < 2:
            raise ConfigError("grid_n must be at least 2")
        if self.n_paths_kde is None:
            self.n_paths_kde = self.n_paths
        if self.eval_index is None:
            self.eval_index = self.grid_n - 1
        if not 0 < self.eval_index <= self.grid_n - 1:
            raise ConfigError("eval_index out of range")
        if self.T <= 0:
            raise ConfigError("horizon T must be positive")
        if not self.x_auto and not self.x_min < 0.0 < self.x_max:
            raise ConfigError("explicit x grid must straddle 0")
        if self.x_n < 3 or self.x_n % 2 == 0:
            raise ConfigError("x_n must be an odd count >= 3 so the grid hits 0")
        lo, hi = self.envelope_quantiles
        if not 0.0 <= lo < hi <= 1.0:
            raise ConfigError("envelope_quantiles must satisfy 0 <= lo < hi <= 1")
        if self.slack < 0:
            raise ConfigError("slack must be nonnegative")

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        version = raw.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}")
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "envelope_quantiles" in raw:
            raw["envelope_quantiles"] = tuple(raw["envelope_quantiles"])
        try:
            return cls(**raw)
        except ConfigError:
            raise
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json_file(cls, path):
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(raw)

    def to_dict(self):
        out = {"schema_version": SCHEMA_VERSION}
        for name in sorted(self.__dataclass_fields__):
            val = getattr(self, name)
            out[name] = list(val) if isinstance(val, tuple) else val
        return out


def preset_config(preset, seed=20240901):
    """Default experiment configuration per preset (plain dict)."""
    base = {"preset": preset, "seed": seed, "schema_version": SCHEMA_VERSION}
    if preset == "linear":
        base.update(n_paths=50_000, grid_n=101, x_min=-3.0, x_max=3.0, x_n=121,
                    envelope_quantiles=[0.005, 0.995])
    elif preset == "additive-linear":
        base.update(n_paths=20_000, grid_n=641, laguerre_nodes=16, n_copies=8,
                    x_min=-4.0, x_max=4.0, x_n=161, params={"slope": 2.0})
    elif preset == "additive-exp":
        base.update(n_paths=10_000, n_paths_kde=100_000, grid_n=101,
                    x_min=-4.0, x_max=4.0, x_n=161, params={"c": 1.0})
    elif preset == "additive-concave":
        base.update(n_paths=10_000, n_paths_kde=50_000, grid_n=101,
                    x_min=-4.0, x_max=4.0, x_n=161, params={"c": 1.0})
    elif preset == "sde-sine":
        base.update(n_paths=2_000, n_paths_kde=2_000, grid_n=65, n_sub=128,
                    x_auto=True, x_n=161, x_half_width_sds=4.0,
                    envelope_quantiles=[0.05, 0.95],
                    params={"x0": 1.0, "H": 0.75, "c": 1.0, "M": 1.0, "M_m": 0.0})
    elif preset == "sde-custom":
        base.update(n_paths=2_000, grid_n=65, n_sub=128, x_auto=True, x_n=161,
                    envelope_quantiles=[0.05, 0.95],
                    params={"x0": 0.0, "H": 0.75, "b_coeffs": [0.0],
                            "sigma_coeffs": [2.0], "c": 2.0, "M": 0.0})
    else:
        raise ConfigError(f"unknown preset {preset!r}")
    return base


@dataclass
class ExperimentReport:
    preset: str
    x_grid: np.ndarray
    densities: dict                 # method_tag -> DensityEstimate
    lower_env: np.ndarray           # may be None
    upper_env: np.ndarray           # may be None
    violation_reports: list
    audits: AuditSet
    diagnostics: dict
    config: dict
    runtimes: dict
    certificate: dict

    @property
    def exit_code(self):
        if not self.audits.all_passed:
            return EXIT_HYPOTHESIS
        if any(not r.passed for r in self.violation_reports):
            return EXIT_ENVELOPE
        return EXIT_PASS


def _symmetric_grid(half_width, n):
    """Odd-point grid on [-hw, hw] containing exactly 0."""
    return np.linspace(-half_width, half_width, n)


def _explicit_grid(cfg):
    grid = np.linspace(cfg.x_min, cfg.x_max, cfg.x_n)
    # snap the closest point to exactly 0 so anchored integrals work
    i0 = int(np.argmin(np.abs(grid)))
    grid[i0] = 0.0
    return grid


def _quantile_mask(x_grid, values, quantiles):
    lo, hi = np.quantile(values, list(quantiles), method="inverted_cdf")
    return (x_grid >= lo) & (x_grid <= hi)


def _masked(env, mask):
    if env is None:
        return None
    out = np.array(env, dtype=float)
    out[~mask] = np.nan
    return out


def _normalize(est):
    """Unit-mass copy of a density estimate on the emitted grid.

    Emitted estimates are probability densities by construction; the raw
    trapezoid mass (a diagnostic of estimator health and grid coverage)
    is preserved under `raw_mass`.
    """
    from .density import DensityEstimate
    raw = est.mass
    out = DensityEstimate(x_grid=est.x_grid, values=est.values / raw,
                          method_tag=est.method_tag, flagged=est.flagged,
                          diagnostics={**est.diagnostics, "raw_mass": raw})
    if hasattr(est, "standard_errors"):
        out.standard_errors = est.standard_errors / raw
    return out


def run_experiment(cfg, threads=1):
    """Execute one experiment; returns an ExperimentReport."""
    t_start = time.perf_counter()
    runtimes = {}
    grid = uniform_grid(cfg.T, cfg.grid_n)
    audits = AuditSet()
    diagnostics = {"backend": _backend.active_name(), "version": __version__}

    if cfg.preset == "linear":
        report = _run_linear(cfg, grid, audits, diagnostics, runtimes, threads)
    elif cfg.preset in ADDITIVE_PRESETS:
        report = _run_additive(cfg, grid, audits, diagnostics, runtimes, threads)
    else:
        report = _run_sde(cfg, grid, audits, diagnostics, runtimes, threads)

    runtimes["total_s"] = time.perf_counter() - t_start
    return report


# ---------------------------------------------------------------------------
# linear preset


def _linear_values(model, grid, n_paths, seed, threads):
    from .gaussian_process import brownian_covariance
    cov = brownian_covariance()
    F = np.empty(n_paths)

    def worker(lo, hi):
        _, dW = path_rows(cov, grid, range(lo, hi), seed)
        F[lo:hi], _ = model.evaluate(dW)

    map_blocks(n_paths, 8192, worker, threads)
    return F


def _run_linear(cfg, grid, audits, diagnostics, runtimes, threads):
    t0 = time.perf_counter()
    model = make_preset("linear", grid, cfg.params)
    x_grid = _explicit_grid(cfg)
    n_all = max(cfg.n_paths, cfg.n_paths_kde)
    F_all = _linear_values(model, grid, n_all, cfg.seed, threads)
    F = F_all[:cfg.n_paths]
    runtimes["sampling_s"] = time.perf_counter() - t0

    from .engine import FunctionalSamples
    samples = FunctionalSamples(values=F, couplings=model.coupling(cfg.n_paths),
                                kind="exact", corrections=np.zeros(cfg.n_paths))
    audits.record("coupling_nonzero", "derivative pairing stays nonzero") \
        .update(cfg.n_paths, int(np.sum(samples.couplings == 0.0)),
                float(np.min(np.abs(samples.couplings))))

    t0 = time.perf_counter()
    bw = silverman_bandwidth(F)
    densities = {
        "nourdin_viens": nourdin_viens_density(samples, x_grid, bandwidth=bw),
        "new_repr": exponential_density(samples, x_grid, bandwidth=bw),
    }
    ind_vals, ind_se = indicator_density_curve(samples, x_grid)
    densities["indicator"] = _indicator_estimate(x_grid, ind_vals, ind_se)
    densities["kde"] = kde_density(F_all[:cfg.n_paths_kde], x_grid)
    densities = {k: _normalize(d) for k, d in densities.items()}
    kde = densities["kde"]
    runtimes["densities_s"] = time.perf_counter() - t0

    i0_lin = int(np.where(x_grid == 0.0)[0][0])
    densities["new_repr"].diagnostics["kde_at_zero"] = float(kde.values[i0_lin])
    sig2 = model.sigma_sq
    e_abs = float(np.mean(np.abs(F)))
    lower, upper = sandwich_envelopes(sig2, sig2, e_abs, x_grid)
    cert = {"kind": "sandwich", "sigma_min_sq": sig2, "sigma_max_sq": sig2,
            "E_abs_F": e_abs}
    mask = _quantile_mask(x_grid, F, cfg.envelope_quantiles)
    reports = [check_envelope(kde, _masked(lower, mask), _masked(upper, mask),
                              cfg.slack)]
    diagnostics.update(sigma_sq=sig2, e_abs_f=e_abs, bandwidth=bw,
                       masses={k: d.mass for k, d in densities.items()},
                       raw_masses={k: d.diagnostics["raw_mass"]
                                   for k, d in densities.items()})
    return ExperimentReport(preset=cfg.preset, x_grid=x_grid,
                            densities=densities, lower_env=lower,
                            upper_env=upper, violation_reports=reports,
                            audits=audits, diagnostics=diagnostics,
                            config=cfg.to_dict(), runtimes=runtimes,
                            certificate=cert)


def _indicator_estimate(x_grid, vals, ses):
    from .density import DensityEstimate
    est = DensityEstimate(x_grid=x_grid, values=np.maximum(vals, 0.0),
                          method_tag="indicator",
                          diagnostics={"max_se": float(np.max(ses))})
    est.standard_errors = ses
    return est


# ---------------------------------------------------------------------------
# additive presets


def _run_additive(cfg, grid, audits, diagnostics, runtimes, threads):
    t0 = time.perf_counter()
    model = make_preset(cfg.preset, grid, cfg.params)
    sig_T_sq, r_min = sigma_T_squared(model.cov, grid)
    audits.record("cov_nonneg", "process covariance nonnegative on the grid") \
        .update(grid.n * grid.n, int(r_min < 0.0), r_min)

    centering = centering_prepass(model, grid, cfg.prepass_factor * cfg.n_paths,
                                  cfg.seed)
    model = model.with_centering(centering)
    runtimes["prepass_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    mc = MehlerConfig(laguerre_nodes=cfg.laguerre_nodes, n_copies=cfg.n_copies,
                      copy_seed=cfg.seed + 1)
    samples = additive_samples(model, grid, cfg.n_paths, cfg.seed, mc,
                               threads=threads)
    runtimes["coupling_s"] = time.perf_counter() - t0

    checked, viol, worst = samples.f1_floor_stats
    audits.record("derivative_floor", "|f'| >= c at every evaluation") \
        .update(checked, viol, worst)
    if model.convexity != "neither":
        c2, v2, w2 = samples.f2_sign_stats
        audits.record("curvature_sign",
                      f"f'' sign consistent with the {model.convexity} flag") \
            .update(c2, v2, w2)
    g_floor = model.c ** 2 * sig_T_sq
    g_margin = samples.couplings - g_floor
    audits.record("coupling_floor", "coupling >= c^2 sigma_T^2 per path") \
        .update(samples.couplings.size, int(np.sum(g_margin < 0)),
                float(g_margin.min()))
    h = samples.corrections
    h_tol = 3.0 * float(np.std(h, ddof=1) / np.sqrt(h.size)) if h.size > 1 else 0.0
    if model.convexity == "convex":
        sign_margin = h + h_tol
        desc = "correction samples >= -3 SE (convex f)"
    elif model.convexity == "concave":
        sign_margin = h_tol - h
        desc = "correction samples <= +3 SE (concave f)"
    else:
        sign_margin = np.full_like(h, np.inf)
        desc = "no correction sign claim"
    audits.record("correction_sign", desc) \
        .update(h.size, int(np.sum(sign_margin < 0)), float(sign_margin.min()))

    t0 = time.perf_counter()
    x_grid = _explicit_grid(cfg)
    F_kde = _additive_kde_values(model, grid, cfg, threads)
    bw = silverman_bandwidth(samples.values)
    densities = {
        "nourdin_viens": nourdin_viens_density(samples, x_grid, bandwidth=bw),
        "new_repr": exponential_density(samples, x_grid, bandwidth=bw),
    }
    ind_vals, ind_se = indicator_density_curve(samples, x_grid)
    densities["indicator"] = _indicator_estimate(x_grid, ind_vals, ind_se)
    densities["kde"] = kde_density(F_kde, x_grid)
    densities = {k: _normalize(d) for k, d in densities.items()}
    kde = densities["kde"]
    runtimes["densities_s"] = time.perf_counter() - t0

    i0 = int(np.where(x_grid == 0.0)[0][0])
    rho0 = float(kde.values[i0])
    densities["new_repr"].diagnostics["kde_at_zero"] = rho0
    cert, lower, upper, reports = None, None, None, []
    if audits.all_passed:
        kwargs = {"m1": 0.0} if model.convexity == "convex" else \
            ({"m2": 0.0} if model.convexity == "concave" else {})
        if kwargs:
            bound = BoundCertificate(sigma_min_sq=g_floor, rho0=rho0, **kwargs)
            lower, upper = gaussian_envelopes(bound, x_grid)
            mask = _quantile_mask(x_grid, samples.values, cfg.envelope_quantiles)
            reports = [check_envelope(kde, _masked(lower, mask), None, cfg.slack)]
            cert = {"kind": "gaussian_lower", "sigma_min_sq": g_floor,
                    "rho0": rho0, **kwargs}
    else:
        cert = {"kind": "withheld", "reason": "hypothesis audit failed"}

    diagnostics.update(sigma_T_sq=sig_T_sq, centering=centering, bandwidth=bw,
                       coupling_floor=g_floor, rho0=rho0,
                       masses={k: d.mass for k, d in densities.items()},
                       raw_masses={k: d.diagnostics["raw_mass"]
                                   for k, d in densities.items()})
    return ExperimentReport(preset=cfg.preset, x_grid=x_grid,
                            densities=densities, lower_env=lower,
                            upper_env=upper, violation_reports=reports,
                            audits=audits, diagnostics=diagnostics,
                            config=cfg.to_dict(), runtimes=runtimes,
                            certificate=cert)


def _additive_kde_values(model, grid, cfg, threads):
    """Functional values for the KDE baseline; first rows coincide with
    the coupling sample paths (same per-path streams)."""
    n = cfg.n_paths_kde
    F = np.empty(n)

    def worker(lo, hi):
        X, _ = path_rows(model.cov, grid, range(lo, hi), cfg.seed)
        F[lo:hi], _ = model.evaluate(X, grid)

    map_blocks(n, 8192, worker, threads)
    return F


# ---------------------------------------------------------------------------
# SDE presets


def _run_sde(cfg, grid, audits, diagnostics, runtimes, threads):
    t0 = time.perf_counter()
    model = make_preset(cfg.preset, grid, cfg.params)
    kernel = VolterraKernel(model.H, jacobi_nodes=cfg.jacobi_nodes)
    nc = NestedConfig(n_sub=cfg.n_sub, sub_seed=cfg.seed + 2)
    samples = sde_samples(model, kernel, grid, cfg.n_paths, cfg.seed, nc,
                          m_index=cfg.eval_index, threads=threads)
    runtimes["nested_s"] = time.perf_counter() - t0

    for key, desc in (("sigma_floor", "|sigma| >= c at every evaluation"),
                      ("m_bound", "|m| <= M_m at every evaluation")):
        checked, viol, worst = samples.bound_stats[key]
        audits.record(key, desc).update(checked, viol, worst)
    if model.m_identically_zero:
        audits.record("m_vanishes", "|m| <= 1e-12 for this preset") \
            .update(cfg.n_paths * grid.n, int(samples.m_abs_max > 1e-12),
                    1e-12 - samples.m_abs_max)

    t_eval = grid.points[cfg.eval_index]
    phi_floor = model.c ** 2 * np.exp(-2.0 * model.M_m * model.T) \
        * t_eval ** (2 * model.H)
    margin = samples.couplings + 3.0 * samples.coupling_se - phi_floor
    audits.record("coupling_floor",
                  "Clark-Ocone coupling >= c^2 e^{-2 M_m T} t^{2H} - 3 SE") \
        .update(samples.couplings.size, int(np.sum(margin < 0)),
                float(margin.min()))
    audits.record("coupling_nonzero", "Clark-Ocone coupling nonzero") \
        .update(samples.couplings.size,
                int(np.sum(np.abs(samples.couplings) < 1e-10)),
                float(np.min(np.abs(samples.couplings))))

    t0 = time.perf_counter()
    F = samples.values
    if cfg.x_auto:
        hw = cfg.x_half_width_sds * float(np.std(F, ddof=1))
        x_grid = _symmetric_grid(hw, cfg.x_n)
    else:
        x_grid = _explicit_grid(cfg)
    densities = {"kde": _normalize(kde_density(F, x_grid))}
    kde = densities["kde"]
    runtimes["densities_s"] = time.perf_counter() - t0

    i0 = int(np.where(x_grid == 0.0)[0][0])
    rho0 = float(kde.values[i0])
    M_h = sde_correction_bound(model)
    cert, lower, upper, reports = None, None, None, []
    if audits.all_passed:
        bound = BoundCertificate(sigma_min_sq=phi_floor, rho0=rho0, M_h=M_h)
        lower, upper = gaussian_envelopes(bound, x_grid)
        mask = _quantile_mask(x_grid, F, cfg.envelope_quantiles)
        reports = [check_envelope(kde, _masked(lower, mask), None, cfg.slack)]
        cert = {"kind": "gaussian_lower", "sigma_min_sq": phi_floor,
                "rho0": rho0, "M_h": M_h}
    else:
        cert = {"kind": "withheld", "reason": "hypothesis audit failed"}

    diagnostics.update(c_H=kernel.c_H, phi_floor=phi_floor, M_h=M_h,
                       centering=float(np.mean(samples.uncentered_values)),
                       eval_time=float(t_eval),
                       masses={k: d.mass for k, d in densities.items()},
                       raw_masses={k: d.diagnostics["raw_mass"]
                                   for k, d in densities.items()})
    return ExperimentReport(preset=cfg.preset, x_grid=x_grid,
                            densities=densities, lower_env=lower,
                            upper_env=upper, violation_reports=reports,
                            audits=audits, diagnostics=diagnostics,
                            config=cfg.to_dict(), runtimes=runtimes,
                            certificate=cert)


# ---------------------------------------------------------------------------
# serialization


def _fmt(x):
    """Floats at 17 significant digits; byte-stable across runs."""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _format_json(obj):
    """JSON text with sorted keys and floats at 17 significant digits.

    Non-finite floats serialize as quoted strings so the files stay
    standard JSON.
    """
    def encode(node, indent=0):
        pad = "  " * indent
        if isinstance(node, dict):
            if not node:
                return "{}"
            items = [f'{pad}  {json.dumps(str(k))}: {encode(node[k], indent + 1)}'
                     for k in sorted(node)]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(node, (list, tuple, np.ndarray)):
            node = list(node)
            if not node:
                return "[]"
            items = [f"{pad}  {encode(v, indent + 1)}" for v in node]
            return "[\n" + ",\n".join(items) + "\n" + pad + "]"
        if isinstance(node, (bool, type(None))):
            return json.dumps(node)
        if isinstance(node, (float, np.floating)):
            node = float(node)
            if np.isnan(node):
                return '"nan"'
            if np.isinf(node):
                return '"inf"' if node > 0 else '"-inf"'
            return _fmt(node)
        if isinstance(node, (int, np.integer)):
            return str(int(node))
        return json.dumps(node)

    return encode(obj) + "\n"


def emit_outputs(report, out_dir):
    """Write density.csv, violations.csv, diagnostics.json, runtimes.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    tags = [t for t in COLUMN_ORDER if t in report.densities]
    header = ["x"] + tags
    cols = [report.x_grid] + [report.densities[t].values for t in tags]
    if report.lower_env is not None:
        header.append("lower_env")
        cols.append(report.lower_env)
    if report.upper_env is not None:
        header.append("upper_env")
        cols.append(report.upper_env)
    lines = [",".join(header)]
    for i in range(report.x_grid.size):
        lines.append(",".join(_fmt(float(c[i])) for c in cols))
    (out / "density.csv").write_text("\n".join(lines) + "\n")

    vlines = ["method,side,index,x,density,bound"]
    for rep in report.violation_reports:
        for v in rep.violations:
            vlines.append(",".join([rep.method_tag, v.side, str(v.index),
                                    _fmt(v.x), _fmt(v.density), _fmt(v.bound)]))
    (out / "violations.csv").write_text("\n".join(vlines) + "\n")

    diag = {
        "preset": report.preset,
        "config": report.config,
        "diagnostics": report.diagnostics,
        "audits": report.audits.to_list(),
        "certificate": report.certificate,
        "envelope_checks": [
            {"method": rep.method_tag, "slack": rep.slack,
             "violations": len(rep.violations), "passed": rep.passed}
            for rep in report.violation_reports
        ],
        "exit_code": report.exit_code,
    }
    (out / "diagnostics.json").write_text(_format_json(diag))
    (out / "runtimes.json").write_text(
        _format_json({"runtimes_s": report.runtimes,
                      "note": "wall-clock; excluded from determinism contract"}))
    return out
