"""Interfaces between agent and environment, and their inverters.

The reward-bonus interface adds c to every reward (the episode-end
reward absorbs the whole future stream c/(1-gamma_q)); its inverter
restores base rewards before the wrapped learner sees them.  The pair
inflates the reward-sum objective by exactly c*i_max/(1-gamma_q) per
run while leaving the interaction with the base environment untouched.
"""

from qualia import (
    BacAgent,
    aligning_aei,
    chain,
    constant_aei,
    default_agent_config,
    gridworld,
    reward_bonus_aei,
    run_aerp,
    run_aierp,
    wrap_inverse,
)
from qualia.metrics import ObjectiveSpec, _trial_objective

c, gamma_q, i_max = 1.0, 0.5, 10
env = gridworld()
cfg = default_agent_config("gridworld")
aei, inverter = reward_bonus_aei(c, gamma_q)

plain = run_aerp(env, BacAgent(cfg, 25, 4), episodes=i_max, seed=99)
paired = run_aierp(env, aei, wrap_inverse(BacAgent(cfg, 25, 4), inverter),
                   episodes=i_max, seed=99)

same = all((a.state, a.action) == (b.base_state, b.action)
           for a, b in zip(plain.steps, paired.steps))
q_spec = ObjectiveSpec("reward_qualia", gamma_q=gamma_q)
q_plain = _trial_objective(plain, q_spec, i_max)
q_paired = _trial_objective(paired, q_spec, i_max)
print(f"seed-coupled runs identical in states and actions: {same}")
print(f"reward-sum objective: {q_plain:.3f} bare vs {q_paired:.3f} behind the interface")
print(f"shift {q_paired - q_plain:.6f} = c*i_max/(1-gamma_q) = {c * i_max / (1 - gamma_q):.6f}")

# the aligning interface rescales rewards so two discount rates agree
gp, gq = 0.9, 1.0
trace = run_aierp(gridworld(), aligning_aei(gp, gq), BacAgent(cfg, 25, 4), episodes=3, seed=5)
from qualia.metrics import trial_return

q = _trial_objective(trace, ObjectiveSpec("reward_qualia", gamma_q=gq), 3)
p = sum(trial_return(trace, i, gp, base=True) for i in range(3))
print(f"\naligning interface: q(gamma_q={gq}) = {q:.6f} equals p(gamma_p={gp}) = {p:.6f}")

# the constant interface severs the agent from the base environment
swift = run_aierp(chain(), constant_aei(), BacAgent(default_agent_config("chain"), 1, 1), episodes=4, seed=1)
print(f"\nconstant interface forwards base action 0 regardless of the agent: "
      f"base actions {sorted({r.aei_action for r in swift.steps})}")
