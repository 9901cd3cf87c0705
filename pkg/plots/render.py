#!/usr/bin/env python3
"""Render experiment figures from the harness CSV files.

Reads the four-file CSV layout produced by an experiment run and writes
three kinds of figures:

* learning curves -- mean return per episode, one curve per baseline
  value, shaded standard-deviation bands;
* signal curves -- mean TD error and mean likelihood ratio per episode,
  shaded standard-error bands (per the differing error-bar conventions
  of the two figure families);
* stacked proportion charts -- per-episode banded proportions of the TD
  error and the likelihood ratio, one panel per baseline value, bands
  stacked bottom-up in file order.

Rendering is a pure function of the CSVs: the script never recomputes a
statistic, and identical inputs yield identical image bytes.

Usage: render.py --in RUN_DIR --out FIG_DIR [--format png|svg]
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "qualia-plots"  # deterministic SVG ids
import matplotlib.pyplot as plt

LEARNING_COLUMNS = ["env", "baseline_c", "episode", "mean_return", "std_return",
                    "stderr_return", "n_trials"]
SIGNAL_COLUMNS = ["env", "baseline_c", "episode", "mean_delta", "stderr_delta",
                  "mean_L", "stderr_L"]
HISTOGRAM_COLUMNS = ["env", "baseline_c", "episode", "metric", "bin_label", "proportion"]

LINE_STYLES = ("-", "--", "-.", ":")
# stacked-band fill colors, low band to high band
BAND_COLORS = ("#67001f", "#d6604d", "#fddbc7", "#f7f7f7", "#d1e5f0", "#4393c3", "#053061")


class SchemaError(ValueError):
    """A CSV input does not carry the expected columns."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure to render.

    kind: "learning_curve" | "signal_curve" | "stacked_proportions".
    For signal curves, ``metric`` picks the column family ("delta" or
    "L"); for stacked charts it picks the histogram metric and
    ``baseline`` the panel.  ``error_band`` is fixed by the kind's
    convention: standard deviation for returns, standard error for
    signals.
    """

    kind: str
    inputs: Path
    output: Path
    metric: str = "delta"
    baseline: Optional[float] = None

    @property
    def error_band(self) -> str:
        return "std_dev" if self.kind == "learning_curve" else "std_err"


def _read_rows(path: Path, expected: list) -> list:
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        for column in expected:
            if column not in header:
                raise SchemaError(f"{path.name}: missing column {column!r}")
        return list(reader)


def _by_baseline(rows: list) -> dict:
    out: dict = {}
    for row in rows:
        out.setdefault(row["baseline_c"], []).append(row)
    for groups in out.values():
        groups.sort(key=lambda r: int(r["episode"]))
    return out


def _label(c: str) -> str:
    return f"c = {c}"


def render_learning_curve(run_dir: Path, output: Path) -> Path:
    rows = _read_rows(run_dir / "learning_curve.csv", LEARNING_COLUMNS)
    env = rows[0]["env"] if rows else "?"
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for k, (c, group) in enumerate(_by_baseline(rows).items()):
        eps = [int(r["episode"]) for r in group]
        mean = [float(r["mean_return"]) for r in group]
        std = [float(r["std_return"]) for r in group]
        ax.plot(eps, mean, LINE_STYLES[k % len(LINE_STYLES)], linewidth=1.2, label=_label(c))
        ax.fill_between(eps, [m - s for m, s in zip(mean, std)],
                        [m + s for m, s in zip(mean, std)], alpha=0.18)
    ax.set_xlabel("episode")
    ax.set_ylabel("mean return")
    ax.set_title(f"{env}: learning curves (shaded: standard deviation)")
    ax.legend()
    fig.tight_layout()
    _save(fig, output)
    return output


def render_signal_curve(run_dir: Path, output: Path, metric: str = "delta") -> Path:
    if metric not in ("delta", "L"):
        raise ValueError(f"unknown signal metric {metric!r}")
    rows = _read_rows(run_dir / "signal_stats.csv", SIGNAL_COLUMNS)
    env = rows[0]["env"] if rows else "?"
    mean_col, se_col = f"mean_{metric}", f"stderr_{metric}"
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for k, (c, group) in enumerate(_by_baseline(rows).items()):
        eps = [int(r["episode"]) for r in group]
        mean = [float(r[mean_col]) for r in group]
        se = [float(r[se_col]) for r in group]
        ax.plot(eps, mean, LINE_STYLES[k % len(LINE_STYLES)], linewidth=1.2, label=_label(c))
        ax.fill_between(eps, [m - s for m, s in zip(mean, se)],
                        [m + s for m, s in zip(mean, se)], alpha=0.18)
    nice = "TD error" if metric == "delta" else "likelihood ratio"
    ax.set_xlabel("episode")
    ax.set_ylabel(f"mean {nice}")
    ax.set_title(f"{env}: per-episode mean {nice} (shaded: standard error)")
    ax.legend()
    fig.tight_layout()
    _save(fig, output)
    return output


def render_stacked_proportions(run_dir: Path, output: Path, metric: str = "delta",
                               baseline: Optional[str] = None) -> Path:
    rows = [r for r in _read_rows(run_dir / "histograms.csv", HISTOGRAM_COLUMNS)
            if r["metric"] == metric]
    if not rows:
        raise SchemaError(f"histograms.csv has no rows for metric {metric!r}")
    env = rows[0]["env"]
    groups = _by_baseline(rows)
    if baseline is not None:
        if baseline not in groups:
            raise ValueError(f"baseline {baseline!r} not present; have {sorted(groups)}")
        groups = {baseline: groups[baseline]}
    fig, axes = plt.subplots(len(groups), 1, figsize=(6.8, 2.6 * len(groups)),
                             sharex=True, squeeze=False)
    for ax, (c, group) in zip(axes.ravel(), groups.items()):
        # bands appear in file order per episode; stack them bottom-up
        labels: list = []
        for row in group:
            if row["bin_label"] not in labels:
                labels.append(row["bin_label"])
            else:
                break
        episodes = sorted({int(r["episode"]) for r in group})
        series = {label: [0.0] * len(episodes) for label in labels}
        index = {ep: k for k, ep in enumerate(episodes)}
        for row in group:
            series[row["bin_label"]][index[int(row["episode"])]] = float(row["proportion"])
        ax.stackplot(episodes, [series[label] for label in labels], labels=labels,
                     colors=BAND_COLORS[: len(labels)], linewidth=0)
        ax.set_ylim(0.0, 1.0)
        ax.set_ylabel("proportion")
        ax.set_title(f"{env}, {_label(c)}")
    axes.ravel()[-1].set_xlabel("episode")
    handles, labels_ = axes.ravel()[0].get_legend_handles_labels()
    fig.legend(handles, labels_, loc="center right", fontsize=7, title=metric)
    fig.tight_layout(rect=(0, 0, 0.8, 1))
    _save(fig, output)
    return output


def render(spec: FigureSpec) -> Path:
    """Render one figure per its spec."""
    if spec.kind == "learning_curve":
        return render_learning_curve(spec.inputs, spec.output)
    if spec.kind == "signal_curve":
        return render_signal_curve(spec.inputs, spec.output, spec.metric)
    if spec.kind == "stacked_proportions":
        baseline = None if spec.baseline is None else repr(spec.baseline)
        return render_stacked_proportions(spec.inputs, spec.output, spec.metric, baseline)
    raise ValueError(f"unknown figure kind {spec.kind!r}")


def _save(fig, output: Path) -> None:
    output.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if output.suffix == ".svg" else {}
    fig.savefig(output, dpi=120, metadata=metadata)
    plt.close(fig)


def render_all(run_dir: Path, out_dir: Path, fmt: str = "png") -> list:
    """All figure kinds for one run directory."""
    written = [
        render_learning_curve(run_dir, out_dir / f"learning_curve.{fmt}"),
        render_signal_curve(run_dir, out_dir / f"signal_delta.{fmt}", "delta"),
        render_signal_curve(run_dir, out_dir / f"signal_L.{fmt}", "L"),
        render_stacked_proportions(run_dir, out_dir / f"proportions_delta.{fmt}", "delta"),
        render_stacked_proportions(run_dir, out_dir / f"proportions_L.{fmt}", "L"),
    ]
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="run_dir", required=True, help="experiment output directory")
    parser.add_argument("--out", dest="out_dir", required=True, help="figure directory")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    args = parser.parse_args(argv)
    try:
        written = render_all(Path(args.run_dir), Path(args.out_dir), args.format)
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
