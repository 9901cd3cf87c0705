"""Which objectives survive relabeling the world's symbols?

Discrete entropy and mutual information are invariant under bijective
re-encodings (so objectives built from them are representation-robust);
differential entropy is not; and reward-sum objectives are exploitable:
the seed-coupled demonstration inflates one by an exact, arbitrary
amount with zero behavioral change.
"""

import numpy as np

from qualia import (
    BacAgent,
    RepresentationMap,
    chain,
    check_invariance,
    default_agent_config,
    differential_entropy_uniform,
    exploitability_demo,
    mutual_information,
    recompute_likelihood_ratios,
    reencode_trace,
    run_aerp,
    shannon_entropy,
)

print("discrete invariance (1000 random pmf/permutation pairs each):")
for measure in ("entropy", "mi", "kl"):
    report = check_invariance(measure, 6, 1000, seed=31)
    print(f"  {measure:>7}: max deviation {report['max_deviation']:.2e} -> "
          f"{'robust' if report['passed'] else 'NOT robust'}")

print(f"\ncontinuous counterexample: H(U[0,1]) = {differential_entropy_uniform(0, 1):g} bit, "
      f"H(U[0,2]) = {differential_entropy_uniform(0, 2):g} bit "
      f"(same physical variable, different encoding)")

# relabeling a trace's ids leaves its likelihood ratios untouched
env = chain()
trace = run_aerp(env, BacAgent(default_agent_config("chain"), 3, 2, snapshot_mode="full"),
                 episodes=6, seed=17)
relabeled = reencode_trace(trace,
                           state_map=RepresentationMap((2, 0, 1)),
                           perception_map=RepresentationMap((2, 0, 1)),
                           action_map=RepresentationMap((1, 0)))
orig = [r for r in recompute_likelihood_ratios(trace) if r is not None]
perm = [r for r in recompute_likelihood_ratios(relabeled) if r is not None]
print(f"\nmax ratio deviation after relabeling every id: {max(abs(a - b) for a, b in zip(orig, perm)):.2e}")

# the constructive exploit: same behavior, inflated reward objective
report = exploitability_demo(env, default_agent_config("chain"), c=-2.0, gamma_q=0.9,
                             trials=5, seed=13, i_max=5)
print(f"\nexploitability demo on the chain (c=-2, gamma_q=0.9, 5 episodes):")
print(f"  non-reward fields identical, performance shift {report.max_performance_deviation:g}")
print(f"  reward objective shifted by exactly {report.expected_qualia_shift:g} per run "
      f"(verified to {report.max_qualia_deviation:.1e})")
