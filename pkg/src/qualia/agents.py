"""Tabular actor-critic with eligibility traces and its intervention knobs.

The learner keeps one policy logit per (state, action) pair and one
value weight per state.  Each non-initial, non-episode-start step runs
the standard update: TD error, critic trace/weight update, then a
policy step along the compatible features of the previous action.  The
update order and expressions here are the reference semantics; the fast
simulation path in `harness` mirrors them expression-for-expression so
the two produce bitwise-identical results on a shared random stream.

Interventions (all composable, all off by default):

* ``baseline_c`` -- constant subtracted from the TD error in the actor
  update only, biasing updates toward reinforcement.
* ``td_bonus`` -- constant added to the stored TD error; the invert
  flags remove it again from the critic and/or actor update, so a fully
  inverted bonus changes the recorded signal and nothing else.
* ``clip_tau`` -- floors the stored TD error at tau.
* ``freeze_critic`` -- disables value learning entirely (used with a
  shifted ``w0`` to realize pessimistic value initialization).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .process import TERMINAL, MemorySnapshot, Perception
from .rng import UniformStream

Vector = Union[float, Sequence[float]]


@dataclass(frozen=True)
class BacConfig:
    """Hyperparameters and intervention knobs of the learner.

    ``lam`` is the eligibility-trace decay rate (written "lambda" in
    config files).  Step sizes of zero freeze the corresponding learner
    component, which the frozen-agent identities rely on.
    """

    alpha: float
    beta: float
    gamma: float = 1.0
    lam: float = 0.8
    theta0: Vector = 0.0
    w0: Vector = 0.0
    baseline_c: Vector = 0.0  # constant, or one entry per state
    td_bonus: float = 0.0
    td_bonus_invert_critic: bool = False
    td_bonus_invert_actor: bool = False
    clip_tau: Optional[float] = None
    freeze_critic: bool = False

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("step sizes must be >= 0")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must be in [0, 1]")
        if not (0.0 <= self.lam <= 1.0):
            raise ValueError("lambda must be in [0, 1]")


class BacMemory(NamedTuple):
    """Agent state after one update.

    ``theta`` is a list of per-state logit rows, ``w`` the value weights,
    ``e`` the eligibility traces (zero right after initialization and at
    each episode start).  ``last_probs`` caches the action distribution
    the last action was drawn from; it is a pure function of (theta,
    last_perception) kept to avoid recomputing the same softmax.
    Treat all fields as immutable.
    """

    theta: list
    w: list
    e: list
    last_perception: Perception
    last_action: int
    last_delta: Optional[float]
    last_delta_raw: Optional[float]
    last_ratio: Optional[float]
    last_probs: Optional[tuple]


def _as_table(init: Vector, rows: int, cols: int) -> list:
    if isinstance(init, (int, float)):
        return [[float(init)] * cols for _ in range(rows)]
    arr = np.asarray(init, dtype=float)
    if arr.shape != (rows, cols):
        raise ValueError(f"theta0 must be scalar or {(rows, cols)}, got {arr.shape}")
    return [list(map(float, row)) for row in arr]


def _as_vector(init: Vector, n: int) -> list:
    if isinstance(init, (int, float)):
        return [float(init)] * n
    arr = np.asarray(init, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"w0 must be scalar or length {n}, got {arr.shape}")
    return list(map(float, arr))


def _probs(row: Sequence[float]) -> tuple:
    """Softmax of one logit row, max-subtracted for stability.

    Shift invariance of the softmax makes the subtraction exact.
    """
    m = max(row)
    exps = [math.exp(x - m) for x in row]
    z = 0.0
    for v in exps:
        z += v
    return tuple(v / z for v in exps)


def softmax_prob(theta, s: int, a: int) -> float:
    """Action probability pi(s, a, theta) under the tabular softmax."""
    return _probs(theta[s])[a]


def action_probabilities(theta, s: int) -> tuple:
    """Full action distribution at state s."""
    return _probs(theta[s])


def compatible_features(theta, s: int, a: int) -> np.ndarray:
    """Gradient of ln pi(s, a, theta) with respect to every logit.

    Row s holds 1 - pi(s, a) at the chosen action and -pi(s, a') at the
    others; every other row is zero.  Each row therefore sums to zero.
    """
    theta = [list(row) for row in theta]
    out = np.zeros((len(theta), len(theta[0])))
    probs = _probs(theta[s])
    for a2, p in enumerate(probs):
        out[s, a2] = (1.0 - p) if a2 == a else -p
    return out


def likelihood_ratio(theta_before, theta_after, s: int, a: int) -> float:
    """How much more probable (s, a) became: pi_after / pi_before.

    Softmax probabilities are strictly positive, so the ratio is always
    defined and strictly positive.
    """
    return softmax_prob(theta_after, s, a) / softmax_prob(theta_before, s, a)


def _sample(probs: Sequence[float], u: float) -> int:
    """Inverse-CDF draw over probabilities in action-index order."""
    acc = 0.0
    last = 0
    for a, p in enumerate(probs):
        acc += p
        if u < acc:
            return a
        last = a
    return last


def bac_step(
    memory: Optional[BacMemory],
    perception: Perception,
    config: BacConfig,
    stream: UniformStream,
    *,
    state_count: int,
    action_count: int,
) -> BacMemory:
    """One memory update: initialization, episode start, or standard update.

    A null memory initializes parameters; a terminal previous perception
    starts a new episode (parameters copied, traces cleared); otherwise
    the standard update runs.  In every case the next action is then
    chosen from the softmax at the new perception, except that the
    terminal perception forces the terminal action without consuming a
    draw.
    """
    delta = delta_raw = ratio = None
    if memory is None:
        theta = _as_table(config.theta0, state_count, action_count)
        w = _as_vector(config.w0, state_count)
        e = [0.0] * state_count
    elif memory.last_perception.terminal:
        theta = memory.theta
        w = memory.w
        e = [0.0] * state_count
    else:
        r = perception.reward
        gamma = config.gamma
        bonus = config.td_bonus
        s_prev = memory.last_perception.state
        a_prev = memory.last_action
        w_prev = memory.w
        v_new = 0.0 if perception.terminal else w_prev[perception.state]
        delta_raw = r + gamma * v_new - w_prev[s_prev]
        delta = delta_raw + bonus
        if config.clip_tau is not None:
            delta = max(config.clip_tau, delta)
        if config.td_bonus_invert_critic:
            delta_c = delta_raw if config.clip_tau is None else delta - bonus
        else:
            delta_c = delta
        if config.td_bonus_invert_actor:
            delta_a = delta_raw if config.clip_tau is None else delta - bonus
        else:
            delta_a = delta

        if config.freeze_critic:
            w = w_prev
            e = memory.e
        else:
            gl = gamma * config.lam
            e = [x * gl for x in memory.e]
            e[s_prev] += 1.0
            ad = config.alpha * delta_c
            w = [wx + ad * ex for wx, ex in zip(w_prev, e)]

        # policy step along the compatible features: x - bd*p at every
        # action, then + bd at the chosen one (same gradient, two writes)
        probs_prev = memory.last_probs
        baseline = config.baseline_c
        if not isinstance(baseline, (int, float)):
            baseline = baseline[s_prev]
        bd = config.beta * (delta_a - baseline)
        row = memory.theta[s_prev]
        new_row = [x - bd * p for x, p in zip(row, probs_prev)]
        new_row[a_prev] += bd
        theta = memory.theta[:]
        theta[s_prev] = new_row
        ratio = _probs(new_row)[a_prev] / probs_prev[a_prev]

    if perception.terminal:
        action = TERMINAL
        probs = None
    else:
        probs = _probs(theta[perception.state])
        action = _sample(probs, stream.next())
    return BacMemory(theta, w, e, perception, action, delta, delta_raw, ratio, probs)


def _digest(theta, w) -> int:
    return hash((tuple(map(tuple, theta)), tuple(w)))


class FullMemoryView(NamedTuple):
    """Debug-mode snapshot: complete copies of the learner state."""

    theta: tuple
    w: tuple
    e: tuple
    delta: Optional[float]
    ratio: Optional[float]

    @property
    def params_digest(self) -> int:
        return hash((self.theta, self.w))


class BacAgent:
    """Engine-facing wrapper binding the learner to an environment's shape.

    ``snapshot_mode`` selects what traces record per step: "hash" (a
    parameter digest plus the step's signals), "full" (complete copies,
    needed by the recent-behavior estimators), or "light" (signals only,
    digest 0) for long runs where hashing would dominate.
    """

    def __init__(self, config: BacConfig, state_count: int, action_count: int, snapshot_mode: str = "hash"):
        if snapshot_mode not in ("hash", "full", "light"):
            raise ValueError(f"unknown snapshot mode {snapshot_mode!r}")
        self.config = config
        self.state_count = state_count
        self.action_count = action_count
        self.snapshot_mode = snapshot_mode

    def update(self, memory, perception, stream):
        if not perception.terminal and not (0 <= perception.state < self.state_count):
            raise ValueError(f"perception state {perception.state} out of range")
        return bac_step(
            memory, perception, self.config, stream,
            state_count=self.state_count, action_count=self.action_count,
        )

    def action_of(self, memory) -> int:
        return memory.last_action

    def signals_of(self, memory):
        return memory.last_delta, memory.last_delta_raw, memory.last_ratio

    def snapshot(self, memory):
        if self.snapshot_mode == "full":
            return FullMemoryView(
                tuple(map(tuple, memory.theta)), tuple(memory.w), tuple(memory.e),
                memory.last_delta, memory.last_ratio,
            )
        digest = _digest(memory.theta, memory.w) if self.snapshot_mode == "hash" else 0
        return MemorySnapshot(digest, memory.last_delta, memory.last_ratio)


def frozen_uniform_agent(state_count: int, action_count: int, snapshot_mode: str = "light") -> BacAgent:
    """Non-learning agent with a fixed uniform policy (zero step sizes)."""
    return BacAgent(BacConfig(alpha=0.0, beta=0.0), state_count, action_count, snapshot_mode)
