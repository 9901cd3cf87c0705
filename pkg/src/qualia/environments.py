"""Experiment environments as tabular models with explicit episode ends.

Both experiment environments embed a finite MDP into the reward-process
formulation: the perception carries the state together with the reward
produced by the transition into it.  State, action, and the reserved
terminal marker are small integers; `state_labels` maps internal ids to
the display names used in the environment descriptions (gridworld cells
are labelled 1..25 with 1 the top-left corner).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .process import TERMINAL

#: Gridworld action encoding (fixed, documented): 0=up 1=down 2=left 3=right.
GRID_ACTIONS = ("up", "down", "left", "right")

#: Chain action encoding: 0 ends the episode, 1 continues down the chain.
CHAIN_ACTIONS = ("end", "continue")


@dataclass(frozen=True)
class EnvironmentModel:
    """A finite environment: initial distribution, sampler, reward rule.

    ``transition(state, action, stream)`` returns the next state id or
    TERMINAL; deterministic environments ignore the stream (and consume
    no draws).  ``reward_fn(prev, new)`` maps the transition into the
    new state to its reward; ``prev`` is TERMINAL or None at episode
    starts.  ``table`` is the deterministic next-state table when one
    exists (used by the value-iteration oracle and the fast simulation
    path); stochastic environments leave it None.
    """

    name: str
    state_count: int
    action_count: int
    initial_distribution: tuple
    transition: Callable
    reward_fn: Callable
    table: Optional[tuple] = None
    state_labels: tuple = field(default=())

    def initial_state(self) -> int:
        """The unique initial state (point-mass distributions only)."""
        support = [s for s, p in enumerate(self.initial_distribution) if p > 0.0]
        if len(support) != 1:
            raise ValueError(f"{self.name} has a non-degenerate initial distribution")
        return support[0]


def _tabular(name, table, reward, d0, labels) -> EnvironmentModel:
    table = tuple(tuple(row) for row in table)

    def transition(state, action, stream):
        return table[state][action]

    return EnvironmentModel(
        name=name,
        state_count=len(table),
        action_count=len(table[0]),
        initial_distribution=tuple(d0),
        transition=transition,
        reward_fn=reward,
        table=table,
        state_labels=tuple(labels),
    )


def gridworld() -> EnvironmentModel:
    """5x5 gridworld: start top-left, episode ends from the bottom-right.

    Moves are deterministic; walking into a wall leaves the position
    unchanged.  Cell 25 transitions to the terminal state under every
    action.  Every transition yields reward -1 except entering the
    terminal state and the first reward of each episode, which are 0.
    """
    table = []
    for s in range(25):
        r, c = divmod(s, 5)
        row = []
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            row.append(nr * 5 + nc if 0 <= nr < 5 and 0 <= nc < 5 else s)
        table.append(row)
    table[24] = [TERMINAL] * 4

    def reward(prev, new):
        if prev is None or prev == TERMINAL:
            return 0.0
        return 0.0 if new == TERMINAL else -1.0

    return _tabular(
        "gridworld", table, reward, d0=(1.0,) + (0.0,) * 24, labels=tuple(str(i + 1) for i in range(25))
    )


def chain() -> EnvironmentModel:
    """Three-state chain: quit early for reward 1 or walk to the end for 10.

    From s1 and s2, action 0 ends the episode (reward 1) and action 1
    moves down the chain (reward 0).  From s3 every action ends the
    episode with reward 10.
    """
    table = [
        [TERMINAL, 1],
        [TERMINAL, 2],
        [TERMINAL, TERMINAL],
    ]

    def reward(prev, new):
        if prev is None or prev == TERMINAL:
            return 0.0
        if new == TERMINAL:
            return 10.0 if prev == 2 else 1.0
        return 0.0

    return _tabular("chain", table, reward, d0=(1.0, 0.0, 0.0), labels=("s1", "s2", "s3"))


def single_state() -> EnvironmentModel:
    """Degenerate one-state, one-action, zero-reward environment."""
    def reward(prev, new):
        return 0.0

    return _tabular("single_state", [[TERMINAL]], reward, d0=(1.0,), labels=("s",))


def optimal_return_oracle(env: EnvironmentModel, max_sweeps: int = 100_000, tol: float = 1e-12) -> float:
    """Maximal expected undiscounted return, by exhaustive value iteration.

    Requires a deterministic transition table.  Sweeps the Bellman
    optimality update with the terminal state pinned at value 0 until a
    fixpoint; a run that fails to converge within the sweep cap (a
    non-terminating optimal policy) is an error.
    """
    if env.table is None:
        raise ValueError(f"{env.name} has no transition table; oracle needs a tabular model")
    values = [0.0] * env.state_count
    for _ in range(max_sweeps):
        delta = 0.0
        for s in range(env.state_count):
            best = None
            for a in range(env.action_count):
                nxt = env.table[s][a]
                q = env.reward_fn(s, nxt) + (0.0 if nxt == TERMINAL else values[nxt])
                if best is None or q > best:
                    best = q
            delta = max(delta, abs(best - values[s]))
            values[s] = best
        if delta <= tol:
            return sum(p * values[s] for s, p in enumerate(env.initial_distribution))
    raise RuntimeError(f"value iteration on {env.name} did not converge in {max_sweeps} sweeps")


_REGISTRY = {"gridworld": gridworld, "chain": chain, "single_state": single_state}


def by_name(name: str) -> EnvironmentModel:
    """Environment lookup for experiment configs: "gridworld" | "chain"."""
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ValueError(f"unknown environment {name!r}; choose from {sorted(_REGISTRY)}") from None
