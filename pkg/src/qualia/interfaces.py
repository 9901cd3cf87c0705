"""Interface layers that transform what the agent experiences.

An interface sits between the base environment and the agent, with its
own (possibly trivial) state updated twice per step: once when the base
perception arrives and once after the agent acts.  All interfaces here
preserve episode termination -- a terminal base perception always maps
to the terminal perception.

The inverter is the agent-side counterpart: it undoes the interface's
perception transform and pre-transforms actions so the wrapped learner
behaves exactly as it would against the bare environment.  Pairing the
reward-bonus interface with its inverter is the library's executable
demonstration that reward-sum objectives can be inflated arbitrarily
without changing any interaction with the base environment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .process import TERMINAL, ContractViolationError, Perception


@dataclass(frozen=True)
class AeiModel:
    """Interface dynamics: state updates plus perception/action/reward maps.

    ``update_pre(prev_intermediate_state, base_perception)`` produces the
    interface state used to build the agent perception; ``update_post``
    absorbs the agent action into the intermediate state that the next
    step's ``update_pre`` sees.  ``base_action`` maps (intermediate
    state, agent action) to the action forwarded to the base
    environment.  ``agent_reward`` extracts the reward the agent is
    given from the (already transformed) perception.
    """

    name: str
    init_state: Any
    update_pre: Callable
    agent_perception: Callable
    agent_reward: Callable
    update_post: Callable
    base_action: Callable


@dataclass(frozen=True)
class AeiInverter:
    """Agent-side inverse of an interface.

    ``perception_inverter`` recovers the base perception from an agent
    perception; ``action_pretransform`` picks the agent action that
    makes the interface forward a desired base action.
    """

    name: str
    perception_inverter: Callable
    action_pretransform: Callable


def identity_aei() -> AeiModel:
    """Interface that changes nothing."""
    return AeiModel(
        name="identity",
        init_state=None,
        update_pre=lambda y_post, base_p: None,
        agent_perception=lambda y, base_p: base_p,
        agent_reward=lambda p: p.reward,
        update_post=lambda y, action: None,
        base_action=lambda y_post, action: action,
    )


def identity_inverter() -> AeiInverter:
    """Inverter of the identity interface: both functions the identity."""
    return AeiInverter("identity", lambda p: p, lambda a: a)


def reward_bonus_aei(c: float, gamma_q: float) -> tuple[AeiModel, AeiInverter]:
    """Stateless interface adding c to every reward, with the episode-end
    reward absorbing the whole future bonus stream c / (1 - gamma_q).

    The agent perception carries the untouched base perception alongside
    the adjusted reward, so the inverter recovers base rewards exactly by
    projection rather than by subtracting the bonus back off.
    """
    if not (0.0 <= gamma_q < 1.0):
        raise ValueError("reward bonus requires gamma_q in [0, 1) so the terminal bonus is finite")
    terminal_bonus = c / (1.0 - gamma_q)

    def agent_perception(y, base_p: Perception) -> Perception:
        bonus = terminal_bonus if base_p.terminal else c
        return Perception(base_p.state, base_p.reward + bonus, base=base_p)

    aei = AeiModel(
        name=f"reward_bonus(c={c}, gamma_q={gamma_q})",
        init_state=None,
        update_pre=lambda y_post, base_p: None,
        agent_perception=agent_perception,
        agent_reward=lambda p: p.reward,
        update_post=lambda y, action: None,
        base_action=lambda y_post, action: action,
    )

    def invert_perception(p: Perception) -> Perception:
        if p.base is None:
            raise ContractViolationError("perception carries no base component to invert")
        return p.base

    inv = AeiInverter(f"reward_bonus_inverse(c={c})", invert_perception, lambda a: a)
    return aei, inv


def aligning_aei(gamma_p: float, gamma_q: float) -> AeiModel:
    """Interface rescaling rewards by (gamma_p / gamma_q)^dur so that the
    gamma_q-discounted agent-reward sum equals the gamma_p-discounted
    base-reward sum term by term.

    The interface state is a (steps-since-episode-start, was-terminal)
    pair maintained from its own observations, not read from any trace
    bookkeeping.  gamma_q must be positive: at zero the rescaling is
    undefined.
    """
    if not (0.0 <= gamma_p <= 1.0):
        raise ValueError("gamma_p must be in [0, 1]")
    if not (0.0 < gamma_q <= 1.0):
        raise ValueError("aligning interface requires gamma_q in (0, 1]")
    ratio = gamma_p / gamma_q

    def update_pre(y_post, base_p: Perception):
        if y_post is None or y_post[1]:
            count = 0
        else:
            count = y_post[0] + 1
        return (count, base_p.terminal)

    def agent_perception(y, base_p: Perception) -> Perception:
        count = y[0]
        # count == 0 is the episode-start reward, which no return reads.
        scaled = base_p.reward if count == 0 else ratio ** (count - 1) * base_p.reward
        return Perception(base_p.state, scaled, base=base_p)

    return AeiModel(
        name=f"aligning(gamma_p={gamma_p}, gamma_q={gamma_q})",
        init_state=None,
        update_pre=update_pre,
        agent_perception=agent_perception,
        agent_reward=lambda p: p.reward,
        update_post=lambda y, action: y,
        base_action=lambda y_post, action: action,
    )


def constant_aei() -> AeiModel:
    """Interface that severs the agent from the base environment.

    The agent sees a single non-terminal perception with reward 0 (plus
    the preserved terminal perception), and the forwarded base action is
    always action 0 regardless of what the agent selects.  Against it,
    every agent induces the same base-state process, so any performance
    measure is constant across agents.  Note the base environment must
    terminate under constant action 0 (the chain does; the gridworld
    does not).
    """
    def agent_perception(y, base_p: Perception) -> Perception:
        if base_p.terminal:
            return Perception(TERMINAL, 0.0, base=base_p)
        return Perception(0, 0.0, base=base_p)

    return AeiModel(
        name="constant",
        init_state=None,
        update_pre=lambda y_post, base_p: None,
        agent_perception=agent_perception,
        agent_reward=lambda p: p.reward,
        update_post=lambda y, action: None,
        base_action=lambda y_post, action: 0,
    )


class InverseAgent:
    """Agent applying an inverter around a base agent.

    Perceptions pass through the inverter before the base agent's
    update; the base agent's action passes through the pretransform on
    the way out.  Memory is the base agent's memory, untouched, which is
    what makes seed-coupled comparisons against the bare agent exact.
    """

    def __init__(self, base_agent, inverter: AeiInverter):
        self.base_agent = base_agent
        self.inverter = inverter

    def update(self, memory, perception, stream):
        return self.base_agent.update(memory, self.inverter.perception_inverter(perception), stream)

    def action_of(self, memory) -> int:
        action = self.base_agent.action_of(memory)
        if action == TERMINAL:
            return TERMINAL
        return self.inverter.action_pretransform(action)

    def signals_of(self, memory):
        return self.base_agent.signals_of(memory)

    def snapshot(self, memory):
        return self.base_agent.snapshot(memory)


def wrap_inverse(agent, inverter: AeiInverter) -> InverseAgent:
    """Wrap an agent with an interface inverter."""
    return InverseAgent(agent, inverter)


def by_spec(kind: str, **params):
    """Interface lookup for experiment configs.

    Returns (aei, inverter_or_None).  Kinds: "identity",
    "reward_bonus" (c, gamma_q), "aligning" (gamma_p, gamma_q),
    "constant".
    """
    if kind == "identity":
        return identity_aei(), identity_inverter()
    if kind == "reward_bonus":
        return reward_bonus_aei(params["c"], params["gamma_q"])
    if kind == "aligning":
        return aligning_aei(params["gamma_p"], params["gamma_q"]), None
    if kind == "constant":
        return constant_aei(), None
    raise ValueError(f"unknown interface kind {kind!r}")
