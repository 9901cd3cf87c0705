"""The objective estimators: performance, reward sums, TD-error sums,
likelihood-ratio reinforcement, perception entropy.

Estimates are Monte Carlo means over trials with standard errors; the
TD-error objective comes in an explicit flavor (the stored signal,
bonuses included) and an implicit flavor (the raw expression), which
coincide for an unmodified learner.
"""

from qualia import (
    BacAgent,
    BacConfig,
    ObjectiveSpec,
    chain,
    entropy_qualia,
    performance_objective,
    reinforcement_qualia,
    reward_qualia,
    run_aerp,
    tde_qualia,
)

env = chain()
cfg = BacConfig(alpha=0.1, beta=0.1)
traces = [run_aerp(env, BacAgent(cfg, 3, 2, snapshot_mode="light"), episodes=50, seed=(21, j))
          for j in range(200)]

p, p_se = performance_objective(traces)
print(f"performance (sum of 50 episode returns): {p:.2f} +- {p_se:.2f}")

for gq in (1.0, 0.9, 0.0):
    q, q_se = reward_qualia(traces, gamma_q=gq)
    print(f"reward objective gamma_q={gq}: {q:.2f} +- {q_se:.2f}")

e, e_se = tde_qualia(traces, 0.9, "explicit")
i, i_se = tde_qualia(traces, 0.9, "implicit")
print(f"TD-error objective (gamma_q=0.9): explicit {e:.3f}, implicit {i:.3f} (equal: {e == i})")

inst, inst_se = reinforcement_qualia(traces, ObjectiveSpec("reinf_sum"))
per, per_se = reinforcement_qualia(traces, ObjectiveSpec("reinf_per_step"))
print(f"reinforcement: summed ratios {inst:.2f} +- {inst_se:.2f}, per-step {per:.3f} +- {per_se:.3f}")

# recent-behavior variants reweight the whole episode so far; they need
# full memory snapshots
debug = [run_aerp(env, BacAgent(cfg, 3, 2, snapshot_mode="full"), episodes=10, seed=(22, j))
         for j in range(20)]
rec, rec_se = reinforcement_qualia(debug, ObjectiveSpec("reinf_recent_sum", capital_lambda=0.7))
print(f"recent-behavior reinforcement (Lambda=0.7): {rec:.2f} +- {rec_se:.2f}")

est = entropy_qualia(traces, gamma_q=0.9)
print(f"perception-entropy objective: {est.estimate:.3f} bits "
      f"(warning: {est.warning or 'none'})")
