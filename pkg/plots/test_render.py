"""Plot package unit tests on hand-written CSV fixtures."""

import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
from render import (  # noqa: E402
    FigureSpec,
    SchemaError,
    render,
    render_all,
    render_learning_curve,
    render_stacked_proportions,
)

BANDS = ["(-inf,-5.0]", "(-5.0,-1.0]", "(-1.0,-1e-06]", "(-1e-06,1e-06]",
         "(1e-06,1.0)", "[1.0,5.0)", "[5.0,inf)"]


def write_run(run_dir: Path, episodes=6, baselines=("0.0", "-5.0")):
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "learning_curve.csv", "w") as f:
        f.write("env,baseline_c,episode,mean_return,std_return,stderr_return,n_trials\n")
        for c in baselines:
            for ep in range(episodes):
                f.write(f"toy,{c},{ep},{-20 + ep},{3.0},{0.3},100\n")
    with open(run_dir / "signal_stats.csv", "w") as f:
        f.write("env,baseline_c,episode,mean_delta,stderr_delta,mean_L,stderr_L\n")
        for c in baselines:
            shift = 0.0 if c == "0.0" else 5.0
            for ep in range(episodes):
                f.write(f"toy,{c},{ep},{-0.5 + 0.1 * ep + shift},0.01,{1.0 + 0.01 * ep},0.001\n")
    with open(run_dir / "histograms.csv", "w") as f:
        f.write("env,baseline_c,episode,metric,bin_label,proportion\n")
        for c in baselines:
            for ep in range(episodes):
                props = [0.05, 0.15, 0.3, 0.1, 0.2, 0.15, 0.05]
                for label, p in zip(BANDS, props):
                    f.write(f"toy,{c},{ep},delta,\"{label}\",{p}\n")
                for label, p in zip(BANDS, reversed(props)):
                    f.write(f"toy,{c},{ep},L,\"{label}\",{p}\n")
    return run_dir


def test_render_all_produces_three_kinds(tmp_path):
    run = write_run(tmp_path / "run")
    written = render_all(run, tmp_path / "figs")
    names = {p.name for p in written}
    assert names == {"learning_curve.png", "signal_delta.png", "signal_L.png",
                     "proportions_delta.png", "proportions_L.png"}
    assert all(p.stat().st_size > 1000 for p in written)


def test_figure_spec_dispatch(tmp_path):
    run = write_run(tmp_path / "run")
    out = render(FigureSpec(kind="stacked_proportions", inputs=run,
                            output=tmp_path / "s.png", metric="L"))
    assert out.exists()
    spec = FigureSpec(kind="learning_curve", inputs=run, output=tmp_path / "lc.png")
    assert spec.error_band == "std_dev"
    assert FigureSpec(kind="signal_curve", inputs=run, output=tmp_path / "x.png").error_band == "std_err"


def test_missing_column_is_named(tmp_path):
    run = write_run(tmp_path / "run")
    text = (run / "learning_curve.csv").read_text().replace("std_return", "spread")
    (run / "learning_curve.csv").write_text(text)
    with pytest.raises(SchemaError, match="std_return"):
        render_learning_curve(run, tmp_path / "x.png")


def test_missing_file_is_reported(tmp_path):
    with pytest.raises(SchemaError, match="missing input file"):
        render_learning_curve(tmp_path, tmp_path / "x.png")


def test_unknown_baseline_panel(tmp_path):
    run = write_run(tmp_path / "run")
    with pytest.raises(ValueError, match="baseline"):
        render_stacked_proportions(run, tmp_path / "x.png", "delta", baseline="3.5")


def test_cli_and_determinism(tmp_path):
    run = write_run(tmp_path / "run")
    script = Path(__file__).parent / "render.py"
    for sub in ("a", "b"):
        proc = subprocess.run(
            [sys.executable, str(script), "--in", str(run), "--out", str(tmp_path / sub),
             "--format", "svg"],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    for name in ("learning_curve.svg", "proportions_delta.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_schema_error_exit_code(tmp_path):
    script = Path(__file__).parent / "render.py"
    proc = subprocess.run(
        [sys.executable, str(script), "--in", str(tmp_path), "--out", str(tmp_path / "f")],
        capture_output=True, text=True)
    assert proc.returncode == 1
    assert "missing input file" in proc.stderr
