"""Generate an agent-environment trace and inspect its episode structure.

The engine chains episodes into one long run: a reserved terminal state
ends each episode, and the next state is drawn from the initial
distribution again.  Traces record every step; episode bounds, durations,
and returns are derived views.
"""

from qualia import (
    TERMINAL,
    chain,
    discounted_return_episode,
    discounted_return_from,
    dump_trace_csv,
    dur,
    frozen_uniform_agent,
    run_aerp,
)

env = chain()
agent = frozen_uniform_agent(env.state_count, env.action_count)
trace = run_aerp(env, agent, episodes=5, seed=42)

print(f"trace of {len(trace.steps)} steps over {len(trace.episodes)} episodes")
print(f"{'t':>3} {'state':>6} {'reward':>7} {'action':>7} {'td_error':>9}")
for rec in trace.steps[:12]:
    state = "s_inf" if rec.state == TERMINAL else env.state_labels[rec.state]
    action = "a_inf" if rec.action == TERMINAL else str(rec.action)
    delta = f"{rec.td_error:.3f}" if rec.td_error is not None else "-"
    print(f"{rec.t:>3} {state:>6} {rec.reward:>7.1f} {action:>7} {delta:>9}")

print("\nepisode bounds (start, end, len):")
for ep in trace.episodes:
    print(f"  episode {ep.episode}: ({ep.start}, {ep.end}), len {ep.len}, "
          f"return {discounted_return_episode(trace, ep.episode, 1.0):.1f}")

ep0 = trace.episodes[0]
print(f"\nduration at the first reward time: dur({ep0.start + 1}) = {dur(ep0.start + 1, ep0)}")
print(f"return from the terminal time is always zero: {discounted_return_from(trace, ep0.end, 1.0)}")

# the per-step CSV dump (one row per step, empty cells for absent fields)
dump_trace_csv(trace, "/tmp/chain_trace.csv")
print("\nwrote /tmp/chain_trace.csv")
