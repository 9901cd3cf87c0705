"""A desk-scale experiment sweep, end to end.

The harness derives one Philox stream per (baseline value, trial),
simulates trials in parallel, reduces them deterministically, and
writes four CSV files plus a manifest.  Re-running the same config
yields byte-identical CSVs regardless of worker count.
"""

import json
from pathlib import Path

from qualia import ExperimentConfig, ObjectiveSpec, default_agent_config, run_experiment

out = Path("/tmp/qualia_demo_run")
config = ExperimentConfig(
    environment="chain",
    agent=default_agent_config("chain"),
    baseline_values=(0.0, -1.0, -5.0),
    i_max=200,
    trials=300,
    master_seed=20250808,
    objectives=(
        ObjectiveSpec("performance"),
        ObjectiveSpec("reward_qualia", gamma_q=0.9),
        ObjectiveSpec("reinf_per_step"),
    ),
    episode_window=(150, 200),
    output_dir=str(out),
)

results = run_experiment(config)

print(f"{'c':>5} {'mean return':>12} {'window mean':>12} {'reinf/step':>11}")
for c, res in results.items():
    wmean, wse = res.window_stats
    reinf, _ = res.objective_estimates[ObjectiveSpec("reinf_per_step")]
    print(f"{c:>5} {res.returns_mean.mean():>12.3f} {wmean:>12.3f} {reinf / res.i_max:>11.4f}")

print(f"\nfiles in {out}:")
for p in sorted(out.iterdir()):
    print(f"  {p.name} ({p.stat().st_size} bytes)")

manifest = json.loads((out / "manifest.json").read_text())
print(f"\nmanifest: generator {manifest['generator']}, version {manifest['version']}, "
      f"wall time {manifest['wall_time_s']}s")
print("rerun this script: the CSVs will be byte-identical.")
