"""Stochastic process engines for agent-environment interaction.

Two generation loops are provided: the plain agent-environment loop
(`run_aerp`) sampling, in order, state -> perception (-> reward) ->
memory -> action each step, and the interface-mediated loop
(`run_aierp`) in which a wrapping interface transforms perceptions,
rewards, and actions between a base environment and the agent.

Episodes are chained into one long run: a reserved terminal state ends
each episode, the terminal perception forces the terminal action, and
the next state is drawn from the initial distribution again.  Traces
are immutable records of every step plus derived episode bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .rng import UniformStream

#: Reserved id for the terminal state / perception / action.
TERMINAL = -1

#: Safety cap on episode length; both bundled environments terminate in
#: far fewer steps under any policy that assigns every action positive
#: probability.
DEFAULT_HORIZON = 10**6


class ContractViolationError(RuntimeError):
    """An agent or interface emitted a value outside its contract."""


class HorizonExceededError(RuntimeError):
    """An episode failed to terminate within the configured horizon."""


class Perception(NamedTuple):
    """What the agent sees at one step: a state id and its reward.

    ``state`` is TERMINAL at episode ends.  Interfaces that transform
    rewards attach the untransformed perception as ``base`` so that an
    inverter can recover it exactly (no arithmetic round trip).
    """

    state: int
    reward: float
    base: Optional["Perception"] = None

    @property
    def terminal(self) -> bool:
        return self.state == TERMINAL


class MemorySnapshot(NamedTuple):
    """Per-step summary of agent memory: a parameter digest plus the
    learning signals recorded at that step.  Full memories are kept only
    in debug mode (see ``BacAgent(snapshot_mode="full")``)."""

    params_digest: int
    delta: Optional[float]
    ratio: Optional[float]


class StepRecord(NamedTuple):
    """One realized step of a process.

    ``td_error`` is the value stored by the agent (bonus included, then
    clipped); ``td_error_raw`` is the bonus-free expression
    reward + gamma*v(new) - v(old).  The two coincide for an unmodified
    actor-critic.  ``likelihood_ratio`` is the probability ratio of the
    previous action under the policy after/before this step's update.
    The base_* fields are populated only by interface-mediated runs.
    """

    t: int
    state: int
    perception: int
    reward: Optional[float]
    memory_snapshot: Optional[MemorySnapshot]
    action: int
    td_error: Optional[float] = None
    td_error_raw: Optional[float] = None
    likelihood_ratio: Optional[float] = None
    base_state: Optional[int] = None
    base_perception: Optional[int] = None
    base_reward: Optional[float] = None
    aei_action: Optional[int] = None


class EpisodeIndex(NamedTuple):
    """Bounds of one episode: start/end times and length end - start."""

    episode: int
    start: int
    end: int
    len: int


@dataclass(frozen=True)
class Trace:
    """Immutable realization of a run: steps, episode bounds, seed key."""

    steps: tuple
    seed: tuple
    episodes: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "episodes", tuple(episode_bounds_of_steps(self.steps)))

    def __len__(self) -> int:
        return len(self.steps)


def episode_bounds_of_steps(steps: Sequence[StepRecord]) -> list[EpisodeIndex]:
    """Derive episode bounds by scanning for terminal states.

    The trace must be non-empty and end on a terminal step; a trace cut
    mid-episode is rejected so episode-indexed quantities stay defined.
    """
    if not steps:
        raise ValueError("empty trace has no episodes")
    if steps[-1].state != TERMINAL:
        raise ValueError("trace ends mid-episode; request whole episodes")
    bounds = []
    start = 0
    for t, rec in enumerate(steps):
        if rec.state == TERMINAL:
            bounds.append(EpisodeIndex(len(bounds), start, t, t - start))
            start = t + 1
    return bounds


def episode_bounds(trace: Trace) -> tuple:
    """Episode bounds of a trace (also available as ``trace.episodes``)."""
    return trace.episodes


def dur(t: int, bounds: EpisodeIndex) -> int:
    """Steps since the episode start at reward time t: t - (start + 1).

    Defined for start < t <= end, the times at which an episode's
    rewards (and updates) occur.
    """
    if not (bounds.start < t <= bounds.end):
        raise ValueError(f"t={t} outside episode ({bounds.start}, {bounds.end}]")
    return t - (bounds.start + 1)


def _episode(trace: Trace, i: int) -> EpisodeIndex:
    try:
        return trace.episodes[i]
    except IndexError:
        raise ValueError(f"trace has {len(trace.episodes)} episodes, no episode {i}") from None


def discounted_return_episode(trace: Trace, i: int, gamma: float) -> float:
    """Discounted return of episode i: sum_{t=start+1}^{end} gamma^dur(t) R_t.

    The episode-start reward R_start is stored in the trace but never
    part of a return (no action influences it).
    """
    ep = _episode(trace, i)
    total = 0.0
    for t in range(ep.start + 1, ep.end + 1):
        r = trace.steps[t].reward
        if r is None:
            raise ValueError("reward-free trace has no returns")
        total += gamma ** (t - (ep.start + 1)) * r
    return total


def discounted_return_from(trace: Trace, t: int, gamma: float) -> float:
    """Discounted return from time t: sum_{k=t+1}^{end} gamma^(k-t-1) R_k.

    Zero at the terminal time of an episode.
    """
    for ep in trace.episodes:
        if ep.start <= t <= ep.end:
            total = 0.0
            for k in range(t + 1, ep.end + 1):
                r = trace.steps[k].reward
                if r is None:
                    raise ValueError("reward-free trace has no returns")
                total += gamma ** (k - (t + 1)) * r
            return total
    raise ValueError(f"t={t} not within any complete episode")


def _draw_initial(env, stream: UniformStream) -> int:
    """Initial-state draw; a point mass consumes no uniform."""
    dist = env.initial_distribution
    support = [s for s, p in enumerate(dist) if p > 0.0]
    if len(support) == 1:
        return support[0]
    u = stream.next()
    acc = 0.0
    for s, p in enumerate(dist):
        acc += p
        if u < acc:
            return s
    return support[-1]


def run_aerp(env, agent, episodes: int, seed, horizon: int = DEFAULT_HORIZON) -> Trace:
    """Generate `episodes` complete episodes of agent-environment interaction.

    Per step the order is: state, perception, reward, memory, action.
    After a terminal state the next state is drawn from the initial
    distribution again.  The run halts after the final episode's
    terminal step, so traces always contain whole episodes.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    stream = UniformStream(seed)
    steps: list[StepRecord] = []
    memory = None
    prev_state: Optional[int] = None  # None only at t=0
    action = TERMINAL
    done = 0
    t = 0
    ep_steps = 0
    while done < episodes:
        if prev_state is None or prev_state == TERMINAL:
            state = _draw_initial(env, stream)
            ep_steps = 0
        else:
            state = env.transition(prev_state, action, stream)
            ep_steps += 1
            if state != TERMINAL and ep_steps > horizon:
                raise HorizonExceededError(f"episode {done} exceeded horizon {horizon}")
        reward = env.reward_fn(prev_state, state) if env.reward_fn is not None else None
        perception = Perception(state, reward)
        memory = agent.update(memory, perception, stream)
        action = agent.action_of(memory)
        if state == TERMINAL:
            if action != TERMINAL:
                raise ContractViolationError("agent must select the terminal action at the terminal perception")
            done += 1
        elif not (0 <= action < env.action_count):
            raise ContractViolationError(f"action {action} outside environment's {env.action_count}-action set")
        delta, delta_raw, ratio = agent.signals_of(memory)
        steps.append(
            StepRecord(
                t=t,
                state=state,
                perception=state,
                reward=reward,
                memory_snapshot=agent.snapshot(memory),
                action=action,
                td_error=delta,
                td_error_raw=delta_raw,
                likelihood_ratio=ratio,
            )
        )
        prev_state = state
        t += 1
    return Trace(steps=tuple(steps), seed=stream.key)


def run_aierp(base_env, aei, agent, episodes: int, seed, horizon: int = DEFAULT_HORIZON) -> Trace:
    """Generate episodes of interface-mediated interaction.

    Per step: base state, base perception, base reward, interface state,
    agent perception, agent reward, memory, agent action, intermediate
    interface state, base action.  The interface preserves termination:
    a terminal base perception always yields the terminal perception.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    stream = UniformStream(seed)
    steps: list[StepRecord] = []
    memory = None
    prev_base: Optional[int] = None
    base_action = TERMINAL
    y_post = aei.init_state
    done = 0
    t = 0
    ep_steps = 0
    while done < episodes:
        if prev_base is None or prev_base == TERMINAL:
            base_state = _draw_initial(base_env, stream)
            ep_steps = 0
        else:
            base_state = base_env.transition(prev_base, base_action, stream)
            ep_steps += 1
            if base_state != TERMINAL and ep_steps > horizon:
                raise HorizonExceededError(f"episode {done} exceeded horizon {horizon}")
        base_reward = base_env.reward_fn(prev_base, base_state)
        base_perception = Perception(base_state, base_reward)
        y = aei.update_pre(y_post, base_perception)
        perception = aei.agent_perception(y, base_perception)
        if base_perception.terminal and not perception.terminal:
            raise ContractViolationError("interface must preserve episode termination")
        reward = aei.agent_reward(perception)
        memory = agent.update(memory, perception, stream)
        action = agent.action_of(memory)
        y_post = aei.update_post(y, action)
        if perception.terminal:
            if action != TERMINAL:
                raise ContractViolationError("agent must select the terminal action at the terminal perception")
            base_action = TERMINAL
            done += 1
        else:
            base_action = aei.base_action(y_post, action)
            if not (0 <= base_action < base_env.action_count):
                raise ContractViolationError(
                    f"interface emitted base action {base_action} outside the {base_env.action_count}-action set"
                )
        delta, delta_raw, ratio = agent.signals_of(memory)
        steps.append(
            StepRecord(
                t=t,
                state=base_state,
                perception=perception.state,
                reward=reward,
                memory_snapshot=agent.snapshot(memory),
                action=action,
                td_error=delta,
                td_error_raw=delta_raw,
                likelihood_ratio=ratio,
                base_state=base_state,
                base_perception=base_state,
                base_reward=base_reward,
                aei_action=base_action,
            )
        )
        prev_base = base_state
        t += 1
    return Trace(steps=tuple(steps), seed=stream.key)


def dump_trace_csv(traces, path) -> None:
    """Write traces as CSV, one row per step; absent fields are empty."""
    def cell(x):
        if x is None:
            return ""
        if isinstance(x, float):
            return f"{x:.9g}"
        return str(x)

    if isinstance(traces, Trace):
        traces = [traces]
    with open(path, "w") as f:
        f.write("trial,t,episode,state,perception_is_terminal,reward,action,td_error,likelihood_ratio\n")
        for trial, trace in enumerate(traces):
            ep = 0
            for rec in trace.steps:
                row = (
                    trial,
                    rec.t,
                    ep,
                    rec.state,
                    int(rec.perception == TERMINAL),
                    cell(rec.reward),
                    rec.action,
                    cell(rec.td_error),
                    cell(rec.likelihood_ratio),
                )
                f.write(",".join(str(c) for c in row) + "\n")
                if rec.state == TERMINAL:
                    ep += 1
