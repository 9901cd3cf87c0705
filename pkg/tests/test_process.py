"""Process engine: generation order, episode bookkeeping, returns."""

import pytest

from qualia import (
    TERMINAL,
    ContractViolationError,
    HorizonExceededError,
    Trace,
    StepRecord,
    chain,
    discounted_return_episode,
    discounted_return_from,
    dur,
    dump_trace_csv,
    frozen_uniform_agent,
    gridworld,
    run_aerp,
    single_state,
)
from qualia.process import EpisodeIndex, episode_bounds_of_steps


def make_trace(states, rewards=None):
    """Hand-built trace from a state sequence (rewards default to 0)."""
    rewards = rewards or [0.0] * len(states)
    steps = [
        StepRecord(t=t, state=s, perception=s, reward=r, memory_snapshot=None,
                   action=TERMINAL if s == TERMINAL else 0)
        for t, (s, r) in enumerate(zip(states, rewards))
    ]
    return Trace(steps=tuple(steps), seed=(0, 0))


def test_single_state_episode_is_two_steps():
    trace = run_aerp(single_state(), frozen_uniform_agent(1, 1), episodes=1, seed=1)
    assert [rec.state for rec in trace.steps] == [0, TERMINAL]
    assert trace.episodes[0] == EpisodeIndex(0, 0, 1, 1)


def test_gridworld_episode_length_equals_moves_plus_terminal():
    env = gridworld()
    trace = run_aerp(env, frozen_uniform_agent(25, 4), episodes=1, seed=7)
    ep = trace.episodes[0]
    # len counts the moves to reach cell 25 plus the terminal transition
    assert trace.steps[ep.end].state == TERMINAL
    assert trace.steps[ep.end - 1].state == 24
    moves = ep.len - 1
    assert discounted_return_episode(trace, 0, 1.0) == -moves


def test_chain_premature_end_fraction_near_three_quarters():
    env = chain()
    trace = run_aerp(env, frozen_uniform_agent(3, 2), episodes=20_000, seed=11)
    premature = sum(1 for ep in trace.episodes if ep.len in (1, 2))
    assert premature / 20_000 == pytest.approx(0.75, abs=0.01)


def test_generation_order_and_terminal_action():
    trace = run_aerp(chain(), frozen_uniform_agent(3, 2), episodes=50, seed=3)
    for rec in trace.steps:
        if rec.state == TERMINAL:
            assert rec.action == TERMINAL
            assert rec.perception == TERMINAL
        else:
            assert 0 <= rec.action < 2
    # first reward of every episode is the episode-start reward 0
    for ep in trace.episodes:
        assert trace.steps[ep.start].reward == 0.0
    # terminal perception occurs exactly once per episode, at its end
    terminals = [rec.t for rec in trace.steps if rec.state == TERMINAL]
    assert terminals == [ep.end for ep in trace.episodes]


def test_total_step_count_identity():
    trace = run_aerp(chain(), frozen_uniform_agent(3, 2), episodes=100, seed=5)
    assert sum(ep.len + 1 for ep in trace.episodes) == len(trace.steps)


def test_determinism_bitwise():
    a = run_aerp(gridworld(), frozen_uniform_agent(25, 4), episodes=3, seed=(9, 2))
    b = run_aerp(gridworld(), frozen_uniform_agent(25, 4), episodes=3, seed=(9, 2))
    assert a.steps == b.steps


def test_episode_bounds_simple_and_chained():
    trace = make_trace([1, 25, TERMINAL])
    assert trace.episodes == (EpisodeIndex(0, 0, 2, 2),)
    trace = make_trace([0, 1, TERMINAL, 0, 1, 2, TERMINAL])
    assert trace.episodes == (EpisodeIndex(0, 0, 2, 2), EpisodeIndex(1, 3, 6, 3))
    for prev, cur in zip(trace.episodes, trace.episodes[1:]):
        assert cur.start == prev.end + 1


def test_episode_bounds_reject_partial_trace():
    steps = make_trace([0, 1, TERMINAL]).steps[:2]
    with pytest.raises(ValueError, match="mid-episode"):
        episode_bounds_of_steps(steps)


def test_gridworld_bounds_large():
    trace = run_aerp(gridworld(), frozen_uniform_agent(25, 4), episodes=500, seed=17)
    assert len(trace.episodes) == 500
    assert all(trace.steps[ep.end].state == TERMINAL for ep in trace.episodes)


def test_dur_values():
    ep = EpisodeIndex(0, 0, 9, 9)
    assert dur(1, ep) == 0
    assert dur(4, ep) == 3
    assert dur(9, ep) == 8
    with pytest.raises(ValueError):
        dur(0, ep)
    with pytest.raises(ValueError):
        dur(10, ep)


def test_discounted_returns():
    # two-move episode with rewards -1, -1, then terminal 0
    trace = make_trace([0, 1, 24, TERMINAL], [0.0, -1.0, -1.0, 0.0])
    assert discounted_return_episode(trace, 0, 1.0) == -2.0
    assert discounted_return_episode(trace, 0, 0.0) == -1.0  # only first reward survives
    assert discounted_return_from(trace, 3, 1.0) == 0.0  # terminal time
    assert discounted_return_from(trace, 1, 1.0) == -1.0  # -1 + 0
    # at the episode start with gamma=1 both definitions coincide
    assert discounted_return_from(trace, 0, 1.0) == discounted_return_episode(trace, 0, 1.0)


def test_discounted_return_gamma_weighting():
    trace = make_trace([0, 1, 2, TERMINAL], [0.0, 2.0, 4.0, 8.0])
    g = 0.5
    assert discounted_return_episode(trace, 0, g) == 2.0 + g * 4.0 + g**2 * 8.0
    assert discounted_return_from(trace, 1, g) == 4.0 + g * 8.0


def test_reward_free_trace_rejects_returns():
    trace = make_trace([0, TERMINAL])
    object.__setattr__(trace, "steps", tuple(r._replace(reward=None) for r in trace.steps))
    with pytest.raises(ValueError, match="reward-free"):
        discounted_return_episode(trace, 0, 1.0)


def test_horizon_guard_names_episode():
    # environment that never terminates
    from qualia.environments import _tabular

    env = _tabular("loop", [[0]], lambda p, n: 0.0, d0=(1.0,), labels=("s",))
    with pytest.raises(HorizonExceededError, match="episode 0"):
        run_aerp(env, frozen_uniform_agent(1, 1), episodes=1, seed=1, horizon=50)


def test_out_of_range_action_is_contract_violation():
    class BadAgent:
        def update(self, memory, perception, stream):
            return perception

        def action_of(self, memory):
            return TERMINAL if memory.terminal else 99

        def signals_of(self, memory):
            return None, None, None

        def snapshot(self, memory):
            return None

    with pytest.raises(ContractViolationError, match="99"):
        run_aerp(gridworld(), BadAgent(), episodes=1, seed=1)


def test_trace_csv_dump(tmp_path):
    trace = run_aerp(chain(), frozen_uniform_agent(3, 2), episodes=2, seed=2)
    path = tmp_path / "trace.csv"
    dump_trace_csv(trace, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "trial,t,episode,state,perception_is_terminal,reward,action,td_error,likelihood_ratio"
    assert len(lines) == len(trace.steps) + 1
    # absent fields stay empty: frozen agent records no ratio at t=0
    assert lines[1].split(",")[8] == "" or lines[1].split(",")[8] == "1"
