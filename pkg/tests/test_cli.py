"""Experiment registry, result serialization, and the command-line surface."""

import json
import subprocess
import sys

import numpy as np
import pytest

from flexscatter.experiments import (
    REGISTRY,
    ExperimentConfig,
    ExperimentSpec,
    ResultRow,
    emit_results,
    run_sweep,
)

FAST = dict(trials=2, seed=3)
FAST_CFG = ExperimentConfig(
    z=31,
    snr_list=(0.0,),
    ratio_list=(0.0, 0.2),
    n_max_list=(1, 2),
    x_list=(0, 1),
    slices=2,
    workload=2,
    history_len=8,
    bp_max_iters=20,
)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(KeyError):
        ExperimentConfig.from_dict({"snr": 1.0})


def test_config_from_dict_accepts_lists():
    cfg = ExperimentConfig.from_dict({"snr_list": [1.0, 2.0], "z": 31})
    assert cfg.snr_list == (1.0, 2.0) and cfg.z == 31


def test_config_builds_code_config():
    cfg = ExperimentConfig.from_dict({"z": 31, "m": 2, "n": 2, "exponent_hi": 4})
    code = cfg.code_config()
    assert code.z == 31 and code.n_bits == 6 * 31
    assert code.exponent_range == (0, 4)


def test_unknown_experiment_rejected():
    with pytest.raises(ValueError):
        ExperimentSpec(name="nonexistent")


def test_emit_csv_single_row():
    rows = [ResultRow("demo", {"b": 1, "a": 2}, "ber", 0.5, 0.0, 10)]
    text = emit_results(rows, "csv")
    lines = text.strip().split("\n")
    assert len(lines) == 2
    assert lines[0] == "experiment,params,metric,mean,stderr,trials"
    assert lines[1].startswith("demo,a=2;b=1,ber,")  # params in sorted key order


def test_emit_json_roundtrip_identity():
    rows = [ResultRow("demo", {"x": 1}, "ber", 0.25, 0.01, 4)]
    text = emit_results(rows, "json")
    parsed = json.loads(text)
    assert json.dumps(parsed, sort_keys=True, indent=2) + "\n" == text


def test_exponent_invariance_grid_cardinality():
    rows = run_sweep(ExperimentSpec("exponent-invariance", FAST_CFG, **FAST))
    assert len(rows) == 2  # one BER row per x in x_list


def test_macro_policies_grid_cardinality():
    rows = run_sweep(ExperimentSpec("macro-policies", FAST_CFG, **FAST))
    # policies x slices rows for each of the five metrics
    assert len(rows) == 3 * 2 * 5
    assert {r.metric for r in rows} == {"ber", "energy_uj", "throughput_mbps", "utility", "elapsed_s"}


def test_rate_sweep_direction_fast():
    cfg = ExperimentConfig(z=31, n_max_list=(1, 2, 3), snr_db=-2.0, bp_max_iters=30)
    rows = run_sweep(ExperimentSpec("rate-sweep", cfg, trials=40, seed=9))
    by_n = {r.params["n_max"]: r.mean for r in rows}
    assert by_n[1] >= by_n[2] >= by_n[3]


def test_every_registered_experiment_is_deterministic():
    for name in REGISTRY:
        a = emit_results(run_sweep(ExperimentSpec(name, FAST_CFG, **FAST)), "csv")
        b = emit_results(run_sweep(ExperimentSpec(name, FAST_CFG, **FAST)), "csv")
        assert a == b, name


def _run_cli(args, env_extra=None):
    import os

    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "flexscatter.cli", *args],
        capture_output=True,
        text=True,
        env=env,
    )


def test_cli_dump_code(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"z": 31}))
    out = tmp_path / "code.txt"
    res = _run_cli(["dump-code", "--config", str(cfg), "--seed", "1", "--out", str(out)])
    assert res.returncode == 0, res.stderr
    text = out.read_text()
    assert text.startswith("# H 155x310")
    assert "# G 155x310" in text
    body = [l for l in text.splitlines() if not l.startswith("#")]
    assert len(body) == 310 and set("".join(body)) <= {"0", "1"}


def test_cli_experiment_writes_csv(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"z": 31, "x_list": [0, 1], "snr_db": 0.0}))
    out = tmp_path / "rows.csv"
    res = _run_cli(
        ["exponent-invariance", "--config", str(cfg), "--seed", "5", "--trials", "2", "--out", str(out)]
    )
    assert res.returncode == 0, res.stderr
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "experiment,params,metric,mean,stderr,trials"
    assert len(lines) == 3


def test_cli_seed_env_fallback(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"z": 31, "x_list": [0], "snr_db": 0.0}))
    a = _run_cli(["exponent-invariance", "--config", str(cfg), "--trials", "2"], {"FLEXSCATTER_SEED": "11"})
    b = _run_cli(["exponent-invariance", "--config", str(cfg), "--seed", "11", "--trials", "2"])
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_cli_unknown_experiment_usage_error():
    res = _run_cli(["frobnicate"])
    assert res.returncode == 2


def test_cli_unwritable_output_is_io_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"z": 31, "x_list": [0], "snr_db": 0.0}))
    res = _run_cli(
        ["exponent-invariance", "--config", str(cfg), "--trials", "2", "--out", "/nonexistent-dir/x.csv"]
    )
    assert res.returncode == 1
    assert "i/o error" in res.stderr


def test_cli_json_format(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"z": 31, "x_list": [0], "snr_db": 0.0}))
    res = _run_cli(["exponent-invariance", "--config", str(cfg), "--trials", "2", "--format", "json"])
    assert res.returncode == 0
    rows = json.loads(res.stdout)
    assert rows and rows[0]["experiment"] == "exponent-invariance"
