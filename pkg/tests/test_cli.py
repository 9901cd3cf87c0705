"""CLI subcommands and exit codes."""

import json

import pytest

from qualia.cli import main


def test_oracle(capsys):
    assert main(["oracle", "--env", "gridworld"]) == 0
    assert "-8" in capsys.readouterr().out
    assert main(["oracle", "--env", "chain"]) == 0
    assert "10" in capsys.readouterr().out


def test_oracle_unknown_env_is_runtime_error(capsys):
    assert main(["oracle", "--env", "nope"]) == 3


def test_check_invariance_json(tmp_path, capsys):
    path = tmp_path / "report.json"
    code = main(["check-invariance", "--measure", "mi", "--alphabet", "4",
                 "--trials", "50", "--seed", "3", "--json", str(path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out
    report = json.loads(path.read_text())
    assert report["passed"] is True
    assert report["check"] == "mi-invariance"


def test_exploit_demo(tmp_path, capsys):
    path = tmp_path / "demo.json"
    code = main(["exploit-demo", "--env", "chain", "--c", "1.0", "--gamma-q", "0.5",
                 "--i-max", "4", "--trials", "3", "--seed", "5", "--json", str(path)])
    assert code == 0
    assert "[PASS]" in capsys.readouterr().out
    report = json.loads(path.read_text())
    assert report["expected_qualia_shift"] == pytest.approx(8.0)


def test_run_with_config_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        """
[experiment]
environment = "chain"
trials = 8
i_max = 6
baseline_values = [0.0]
"""
    )
    out_dir = tmp_path / "out"
    code = main(["run", "--config", str(cfg), "--trials", "10", "--seed", "2",
                 "--out", str(out_dir), "--threads", "1"])
    assert code == 0
    assert (out_dir / "learning_curve.csv").exists()
    assert (out_dir / "manifest.json").exists()
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["config"]["trials"] == 10
    assert manifest["config"]["master_seed"] == 2
    assert manifest["generator"] == "philox4x64"


def test_run_missing_config_exits_2():
    assert main(["run", "--config", "/nonexistent.toml"]) == 2


def test_run_bad_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[experiment]\nenvironment = \"chain\"\ntrials = 1\n")
    assert main(["run", "--config", str(cfg)]) == 2


def test_accept_fast_suite_subset(capsys, monkeypatch):
    monkeypatch.setenv("QUALIA_ACCEPT_TRIALS", "50")
    code = main(["accept", "--suite", "gradient-checks"])
    out = capsys.readouterr().out
    assert "criterion 6" in out
    assert code == 0
