import json

import numpy as np
import pytest

from wfdensity.errors import ConfigError
from wfdensity.experiment import (EXIT_HYPOTHESIS, EXIT_PASS, ExperimentConfig,
                                  emit_outputs, preset_config, run_experiment)


def _small_linear(seed=7, **overrides):
    raw = {"preset": "linear", "seed": seed, "n_paths": 3000, "grid_n": 33,
           "x_n": 41, "x_min": -3.0, "x_max": 3.0, "slack": 0.3}
    raw.update(overrides)
    return ExperimentConfig.from_dict(raw)


def _small_additive(**overrides):
    raw = {"preset": "additive-exp", "seed": 11, "n_paths": 600,
           "n_paths_kde": 2000, "grid_n": 41, "laguerre_nodes": 8,
           "n_copies": 8, "prepass_factor": 2, "x_min": -4.0, "x_max": 4.0,
           "x_n": 61}
    raw.update(overrides)
    return ExperimentConfig.from_dict(raw)


def _small_sde(**overrides):
    raw = {"preset": "sde-sine", "seed": 12, "n_paths": 64, "grid_n": 17,
           "n_sub": 16, "x_auto": True, "x_n": 41,
           "envelope_quantiles": [0.05, 0.95]}
    raw.update(overrides)
    return ExperimentConfig.from_dict(raw)


# -- config validation ----------------------------------------------------------

def test_config_rejects_unknown_preset():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"preset": "mystery", "seed": 1})


def test_config_rejects_unknown_fields():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"preset": "linear", "seed": 1, "bogus": 2})


def test_config_rejects_bad_counts():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"preset": "linear", "seed": 1, "n_paths": 0})


def test_config_rejects_even_x_n():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"preset": "linear", "seed": 1, "x_n": 40})


def test_config_rejects_bad_schema_version():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"preset": "linear", "seed": 1,
                                    "schema_version": 99})


def test_config_file_round_trip(tmp_path):
    raw = preset_config("linear")
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(raw))
    cfg = ExperimentConfig.from_json_file(p)
    assert cfg.preset == "linear"
    assert cfg.n_paths == raw["n_paths"]


def test_preset_config_all_construct():
    for name in ("linear", "additive-linear", "additive-exp",
                 "additive-concave", "sde-sine", "sde-custom"):
        ExperimentConfig.from_dict(preset_config(name))


# -- runs and reports -------------------------------------------------------------

def test_linear_run_passes_and_reports():
    rep = run_experiment(_small_linear(), threads=2)
    assert rep.exit_code == EXIT_PASS
    assert set(rep.densities) == {"nourdin_viens", "new_repr", "indicator", "kde"}
    assert rep.audits.all_passed
    assert rep.certificate["kind"] == "sandwich"
    assert rep.lower_env is not None and rep.upper_env is not None


def test_additive_run_passes():
    rep = run_experiment(_small_additive(), threads=2)
    assert rep.exit_code == EXIT_PASS
    assert rep.certificate["kind"] == "gaussian_lower"
    assert rep.certificate["m1"] == 0.0        # convex branch, x <= 0 bound
    assert rep.diagnostics["sigma_T_sq"] == pytest.approx(1 / 3, abs=2e-3)


def test_additive_concave_uses_m2():
    cfg = _small_additive()
    raw = cfg.to_dict()
    raw["preset"] = "additive-concave"
    rep = run_experiment(ExperimentConfig.from_dict(raw), threads=1)
    assert rep.exit_code == EXIT_PASS
    assert rep.certificate["m2"] == 0.0        # concave branch, x >= 0 bound


def test_sde_run_passes():
    rep = run_experiment(_small_sde(), threads=2)
    assert rep.exit_code == EXIT_PASS
    assert set(rep.densities) == {"kde"}
    assert rep.certificate["M_h"] == pytest.approx(4 * np.e ** 2, rel=1e-12)
    assert rep.diagnostics["phi_floor"] == pytest.approx(1.0, rel=1e-12)


def test_additive_with_fbm_covariance():
    # positive-correlation hypothesis audit holds for H > 1/2
    rep = run_experiment(_small_additive(params={"c": 1.0, "cov_H": 0.75},
                                         x_min=-5.0, x_max=5.0, x_n=81),
                         threads=1)
    rec = {r["hypothesis"]: r for r in rep.audits.to_list()}
    assert rec["cov_nonneg"]["violations"] == 0
    assert rep.exit_code == EXIT_PASS


def test_misconfigured_floor_exits_hypothesis():
    # deliberately wrong derivative floor: audits report and gate the cert
    rep = run_experiment(_small_additive(params={"c": 5.0}), threads=1)
    assert rep.exit_code == EXIT_HYPOTHESIS
    rec = {r["hypothesis"]: r for r in rep.audits.to_list()}
    assert rec["coupling_floor"]["violations"] > 0
    assert rep.certificate["kind"] == "withheld"
    assert rep.lower_env is None


# -- serialization ------------------------------------------------------------------

def test_emit_outputs_round_trip(tmp_path):
    rep = run_experiment(_small_linear(), threads=1)
    out = emit_outputs(rep, tmp_path / "out")
    lines = (out / "density.csv").read_text().strip().split("\n")
    header = lines[0].split(",")
    assert header[0] == "x"
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    # 17 significant digits round-trip exactly
    assert np.array_equal(data[:, 0], rep.x_grid)
    for k, tag in enumerate(header[1:], start=1):
        if tag in rep.densities:
            assert np.array_equal(data[:, k], rep.densities[tag].values)
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["exit_code"] == rep.exit_code
    assert (out / "runtimes.json").exists()


def test_emit_outputs_header_only_when_clean(tmp_path):
    rep = run_experiment(_small_linear(), threads=1)
    out = emit_outputs(rep, tmp_path / "out")
    assert (out / "violations.csv").read_text().strip() == \
        "method,side,index,x,density,bound"


def test_runs_byte_identical_across_threads(tmp_path):
    for name, cfg in (("lin", _small_linear()), ("add", _small_additive()),
                      ("sde", _small_sde())):
        outs = []
        for threads in (1, 4):
            rep = run_experiment(cfg, threads=threads)
            out = emit_outputs(rep, tmp_path / f"{name}_{threads}")
            outs.append(out)
        for fname in ("density.csv", "violations.csv", "diagnostics.json"):
            a = (outs[0] / fname).read_bytes()
            b = (outs[1] / fname).read_bytes()
            assert a == b, f"{name}/{fname} differs across thread counts"


def test_seed_changes_outputs():
    rep1 = run_experiment(_small_linear(seed=1), threads=1)
    rep2 = run_experiment(_small_linear(seed=2), threads=1)
    assert not np.array_equal(rep1.densities["kde"].values,
                              rep2.densities["kde"].values)


def test_emit_outputs_empty_report(tmp_path):
    # degenerate report: no densities, no envelopes -> header-only CSVs
    from wfdensity.audit import AuditSet
    from wfdensity.experiment import ExperimentReport
    rep = ExperimentReport(preset="linear", x_grid=np.empty(0), densities={},
                           lower_env=None, upper_env=None,
                           violation_reports=[], audits=AuditSet(),
                           diagnostics={}, config={}, runtimes={},
                           certificate={})
    out = emit_outputs(rep, tmp_path / "empty")
    assert (out / "density.csv").read_text() == "x\n"
    assert (out / "violations.csv").read_text().strip() == \
        "method,side,index,x,density,bound"


def test_cli_error_record_for_blowup(tmp_path):
    # blowing-up custom SDE writes a structured error record and exits 4
    import json as _json
    import warnings
    from wfdensity.cli import main
    warnings.filterwarnings("ignore", category=RuntimeWarning)
    raw = {"preset": "sde-custom", "seed": 3, "n_paths": 8, "grid_n": 17,
           "n_sub": 2, "x_auto": True, "x_n": 41,
           "params": {"x0": 5.0, "H": 0.75, "b_coeffs": [0, 0, 1e300, 2.0],
                      "sigma_coeffs": [1.0], "c": 1.0, "M": 1.0}}
    cfg = tmp_path / "cfg.json"
    cfg.write_text(_json.dumps(raw))
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 4
    rec = _json.loads((tmp_path / "o" / "error.json").read_text())
    assert rec["error_class"] == "NumericalBlowupError"
    assert rec["exit_code"] == 4
