"""Environment definitions and the value-iteration oracle."""

import pytest

from qualia import TERMINAL, chain, gridworld, optimal_return_oracle, single_state
from qualia import frozen_uniform_agent, run_aerp, discounted_return_episode
from qualia.environments import by_name


class TestGridworld:
    def setup_method(self):
        self.env = gridworld()

    def test_shape(self):
        assert self.env.state_count == 25
        assert self.env.action_count == 4
        assert self.env.initial_state() == 0  # labelled "1", the top-left cell
        assert self.env.state_labels[0] == "1"
        assert self.env.state_labels[24] == "25"

    def test_moves(self):
        # cell 1 (id 0): right goes to cell 2 (id 1); up hits the wall
        assert self.env.table[0][3] == 1
        assert self.env.table[0][0] == 0
        # interior cell 7 (id 6) moves in all four directions
        assert self.env.table[6] == (1, 11, 5, 7)

    def test_cell_25_always_terminates(self):
        assert all(self.env.table[24][a] == TERMINAL for a in range(4))
        assert self.env.reward_fn(24, TERMINAL) == 0.0

    def test_rewards(self):
        assert self.env.reward_fn(0, 1) == -1.0
        assert self.env.reward_fn(0, 0) == -1.0  # wall bump still costs a step
        assert self.env.reward_fn(TERMINAL, 0) == 0.0  # episode-start reward
        assert self.env.reward_fn(None, 0) == 0.0

    def test_every_return_counts_moves(self):
        trace = run_aerp(self.env, frozen_uniform_agent(25, 4), episodes=30, seed=23)
        for ep in trace.episodes:
            assert discounted_return_episode(trace, ep.episode, 1.0) == -(ep.len - 1)


class TestChain:
    def setup_method(self):
        self.env = chain()

    def test_transitions_and_rewards(self):
        assert self.env.table[0][0] == TERMINAL and self.env.reward_fn(0, TERMINAL) == 1.0
        assert self.env.table[1][1] == 2 and self.env.reward_fn(1, 2) == 0.0
        assert self.env.table[2][0] == TERMINAL and self.env.reward_fn(2, TERMINAL) == 10.0
        assert self.env.table[2][1] == TERMINAL

    def test_only_returns_are_one_and_ten(self):
        trace = run_aerp(self.env, frozen_uniform_agent(3, 2), episodes=500, seed=29)
        for ep in trace.episodes:
            ret = discounted_return_episode(trace, ep.episode, 1.0)
            assert ret in (1.0, 10.0)
            assert ep.len in (1, 2, 3)
            assert (ret == 10.0) == (ep.len == 3)

    def test_uniform_policy_first_episode_value(self):
        trace = run_aerp(self.env, frozen_uniform_agent(3, 2), episodes=20_000, seed=31)
        mean = sum(discounted_return_episode(trace, i, 1.0) for i in range(20_000)) / 20_000
        assert mean == pytest.approx(3.25, abs=0.1)  # 0.75*1 + 0.25*10


def test_oracle_values():
    assert optimal_return_oracle(gridworld()) == -8.0
    assert optimal_return_oracle(chain()) == 10.0
    assert optimal_return_oracle(single_state()) == 0.0


def test_by_name():
    assert by_name("gridworld").name == "gridworld"
    assert by_name("chain").name == "chain"
    with pytest.raises(ValueError, match="unknown environment"):
        by_name("cartpole")


def test_chain_uniform_values_by_exact_enumeration():
    # every trajectory class under the uniform policy, from the table
    env = chain()
    p_premature = 0.0
    expected_return = 0.0
    stack = [(0, 1.0, 0.0)]  # (state, probability, moves)
    while stack:
        s, p, moves = stack.pop()
        for a in range(env.action_count):
            nxt = env.table[s][a]
            q = p / env.action_count
            if nxt == TERMINAL:
                ret = env.reward_fn(s, nxt)
                expected_return += q * ret
                if moves + 1 <= 2:
                    p_premature += q
            else:
                stack.append((nxt, q, moves + 1))
    assert p_premature == 0.75
    assert expected_return == 3.25
