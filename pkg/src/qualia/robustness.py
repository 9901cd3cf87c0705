"""Representation robustness: information measures, re-encodings, and
the executable exploitability demonstrations.

Discrete entropy and mutual information are invariant under per-variable
bijective re-encodings, which makes objectives built from them immune to
the relabeling attacks demonstrated here; differential entropy is not,
and the analytic uniform-scaling counterexample is included as the
continuous cautionary case.  `exploitability_demo` is the constructive
counterpart: a seed-coupled pair of runs that inflates the reward-sum
objective by an exact, arbitrary amount while leaving every interaction
with the base environment untouched.

Units: entropy and mutual information in bits, relative entropy in nats.
Estimator internals use natural logs and convert at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .agents import BacAgent, BacConfig, FullMemoryView, softmax_prob
from .environments import EnvironmentModel
from .interfaces import reward_bonus_aei, wrap_inverse
from .metrics import ObjectiveSpec, _trial_objective
from .process import TERMINAL, Trace, run_aerp, run_aierp
from .rng import philox_key

_LN2 = math.log(2.0)
_PMF_TOL = 1e-12


def _validate_pmf(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if (p < 0.0).any():
        raise ValueError("pmf has negative entries")
    if abs(float(p.sum()) - 1.0) > _PMF_TOL:
        raise ValueError(f"pmf sums to {p.sum()!r}, not 1")
    return p


def shannon_entropy(p) -> float:
    """Entropy of a finite pmf, in bits; 0*log(0) counts as 0."""
    p = _validate_pmf(p).ravel()
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum() / _LN2)


def mutual_information(joint) -> float:
    """Mutual information of a joint pmf over pairs, in bits.

    The joint is a 2-D array; marginals are its row and column sums.
    Zero joint cells contribute zero.
    """
    joint = _validate_pmf(joint)
    if joint.ndim != 2:
        raise ValueError("joint pmf must be 2-dimensional")
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    total = 0.0
    for i in range(joint.shape[0]):
        for j in range(joint.shape[1]):
            pij = joint[i, j]
            if pij > 0.0:
                total += pij * math.log(pij / (px[i] * py[j]))
    return total / _LN2


def kl_divergence(p, q) -> float:
    """Relative entropy between pmfs, in nats; needs supp(p) within supp(q)."""
    p = _validate_pmf(p).ravel()
    q = _validate_pmf(q).ravel()
    if p.shape != q.shape:
        raise ValueError("pmfs must share an alphabet")
    if ((p > 0.0) & (q == 0.0)).any():
        raise ValueError("relative entropy undefined: supp(p) not within supp(q)")
    mask = p > 0.0
    return float((p[mask] * np.log(p[mask] / q[mask])).sum())


def differential_entropy_uniform(a: float, b: float) -> float:
    """Differential entropy of Uniform[a, b], in bits: log2(b - a).

    The analytic continuous counterexample: stretching [0,1] to [0,2] is
    an invertible transformation yet moves the entropy from 0 to 1 bit.
    """
    if not b > a:
        raise ValueError("need b > a")
    return math.log2(b - a)


@dataclass(frozen=True)
class RepresentationMap:
    """Bijective re-encoding of a finite id alphabet.

    ``forward`` is a permutation table over ids 0..n-1.  The terminal
    marker is not part of any alphabet and is always a fixed point, so
    every map is termination-preserving by construction; a table that
    mentions the terminal id is rejected.
    """

    forward: tuple
    label: str = "perm"
    inverse: tuple = field(init=False)

    def __post_init__(self):
        fwd = tuple(int(x) for x in self.forward)
        n = len(fwd)
        if TERMINAL in fwd:
            raise ValueError("representation maps must fix the terminal id")
        if sorted(fwd) != list(range(n)):
            raise ValueError(f"{self.label}: not a bijection on 0..{n - 1}")
        inv = [0] * n
        for i, j in enumerate(fwd):
            inv[j] = i
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "inverse", tuple(inv))

    def __call__(self, idx: int) -> int:
        return idx if idx == TERMINAL else self.forward[idx]


def _permute_snapshot(snap, state_map: Optional[RepresentationMap],
                      action_map: Optional[RepresentationMap]):
    if not isinstance(snap, FullMemoryView):
        return snap  # digests are opaque; only full snapshots re-encode
    ns = len(snap.w)
    na = len(snap.theta[0])
    srange = range(ns)
    arange = range(na)
    theta = [[0.0] * na for _ in srange]
    w = [0.0] * ns
    e = [0.0] * ns
    for s in srange:
        s2 = state_map(s) if state_map else s
        w[s2] = snap.w[s]
        e[s2] = snap.e[s]
        for a in arange:
            a2 = action_map(a) if action_map else a
            theta[s2][a2] = snap.theta[s][a]
    return FullMemoryView(tuple(map(tuple, theta)), tuple(w), tuple(e), snap.delta, snap.ratio)


def reencode_trace(
    trace: Trace,
    state_map: Optional[RepresentationMap] = None,
    perception_map: Optional[RepresentationMap] = None,
    action_map: Optional[RepresentationMap] = None,
    reward_shift: float = 0.0,
) -> Trace:
    """Trace under different representation functions.

    Ids are relabeled per field; full memory snapshots are permuted
    consistently.  ``reward_shift`` adds a constant to every
    non-terminal reward (the value-level analogue of re-encoding the
    reward's bit pattern), leaving episode structure untouched.
    """
    steps = []
    for rec in trace.steps:
        steps.append(rec._replace(
            state=state_map(rec.state) if state_map else rec.state,
            perception=perception_map(rec.perception) if perception_map else rec.perception,
            action=action_map(rec.action) if action_map else rec.action,
            memory_snapshot=_permute_snapshot(rec.memory_snapshot, state_map, action_map),
            reward=(rec.reward + reward_shift
                    if reward_shift and rec.state != TERMINAL and rec.reward is not None
                    else rec.reward),
        ))
    return Trace(steps=tuple(steps), seed=trace.seed)


def recompute_likelihood_ratios(trace: Trace) -> list:
    """Likelihood ratios recomputed from stored policy parameters.

    Needs full memory snapshots.  Entry t is the probability ratio of
    (state, action) at t-1 under the policies after/before the update at
    t, or None where no update happened; on an un-re-encoded trace it
    reproduces the recorded ratios.
    """
    out: list = []
    for t, rec in enumerate(trace.steps):
        if rec.td_error is None or t == 0:
            out.append(None)
            continue
        prev = trace.steps[t - 1]
        snap_new, snap_old = rec.memory_snapshot, prev.memory_snapshot
        if not isinstance(snap_new, FullMemoryView) or not isinstance(snap_old, FullMemoryView):
            raise ValueError("recomputing ratios needs full memory snapshots")
        out.append(softmax_prob(snap_new.theta, prev.state, prev.action)
                   / softmax_prob(snap_old.theta, prev.state, prev.action))
    return out


def check_invariance(measure: str, alphabet_size: int, trials: int, seed,
                     tolerance: float = 1e-12) -> dict:
    """Sample random pmfs and permutations; report the worst deviation.

    measure="entropy": H(p) vs H under a relabeled alphabet.
    measure="mi": joint pmf vs independent row/column relabelings.
    measure="kl": pair of pmfs vs a shared relabeling.
    """
    if alphabet_size < 2:
        raise ValueError("alphabet_size must be >= 2")
    if measure not in ("entropy", "mi", "kl"):
        raise ValueError(f"unknown measure {measure!r}")
    rng = np.random.Generator(np.random.Philox(key=philox_key(seed)))
    worst = 0.0
    for _ in range(trials):
        if measure == "entropy":
            p = rng.dirichlet(np.ones(alphabet_size))
            perm = RepresentationMap(tuple(rng.permutation(alphabet_size)))
            dev = abs(shannon_entropy(p) - shannon_entropy(p[list(perm.forward)]))
        elif measure == "mi":
            joint = rng.dirichlet(np.ones(alphabet_size * alphabet_size))
            joint = joint.reshape(alphabet_size, alphabet_size)
            rp = list(rng.permutation(alphabet_size))
            cp = list(rng.permutation(alphabet_size))
            relabeled = joint[np.ix_(np.argsort(rp), np.argsort(cp))]
            dev = abs(mutual_information(joint) - mutual_information(relabeled))
        else:
            p = rng.dirichlet(np.ones(alphabet_size))
            q = rng.dirichlet(np.ones(alphabet_size))
            perm = list(rng.permutation(alphabet_size))
            dev = abs(kl_divergence(p, q) - kl_divergence(p[perm], q[perm]))
        worst = max(worst, float(dev))
    return {
        "check": f"{measure}-invariance",
        "alphabet_size": alphabet_size,
        "trials": trials,
        "max_deviation": worst,
        "tolerance": tolerance,
        "passed": bool(worst <= tolerance),
    }


_TRACE_COUPLED_FIELDS = ("t", "action", "td_error", "td_error_raw",
                         "likelihood_ratio", "memory_snapshot")


@dataclass
class ExploitReport:
    """Outcome of the seed-coupled reward-bonus demonstration."""

    env: str
    c: float
    gamma_q: float
    i_max: int
    trials: int
    passed: bool
    max_qualia_deviation: float
    max_performance_deviation: float
    expected_qualia_shift: float
    failure: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "check": "exploitability-demo",
            "env": self.env,
            "c": self.c,
            "gamma_q": self.gamma_q,
            "i_max": self.i_max,
            "trials": self.trials,
            "expected_qualia_shift": self.expected_qualia_shift,
            "max_deviation": self.max_qualia_deviation,
            "performance_deviation": self.max_performance_deviation,
            "passed": self.passed,
            "failure": self.failure,
        }


def exploitability_demo(env: EnvironmentModel, config: BacConfig, c: float,
                        gamma_q: float, trials: int, seed, i_max: int = 10) -> ExploitReport:
    """Seed-coupled demonstration that the reward-sum objective is
    inflatable without behavioral change.

    Per trial, the bare learner on the bare environment is compared
    field-for-field against the inverse learner behind the reward-bonus
    interface on the same random stream.  Everything except the agent
    reward must coincide exactly; the per-trial reward-sum objective
    must shift by exactly c * i_max / (1 - gamma_q); the per-trial
    performance difference must be exactly zero.
    """
    if not (0.0 <= gamma_q < 1.0):
        raise ValueError("gamma_q must be in [0, 1)")
    expected = c * i_max / (1.0 - gamma_q)
    n, k = env.state_count, env.action_count
    q_spec = ObjectiveSpec("reward_qualia", gamma_q=gamma_q)
    p_spec = ObjectiveSpec("performance")
    max_q_dev = 0.0
    max_p_dev = 0.0
    failure = None
    master = philox_key(seed)
    for j in range(trials):
        key = (master[0], master[1] ^ j)
        aei, inv = reward_bonus_aei(c, gamma_q)
        plain = run_aerp(env, BacAgent(config, n, k), episodes=i_max, seed=key)
        paired = run_aierp(env, aei, wrap_inverse(BacAgent(config, n, k), inv),
                           episodes=i_max, seed=key)
        for ra, rb in zip(plain.steps, paired.steps):
            if ra.state != rb.base_state:
                failure = f"trial {j}: field base_state diverges at t={ra.t}"
                break
            if rb.base_reward != ra.reward:
                failure = f"trial {j}: field base_reward diverges at t={ra.t}"
                break
            for f in _TRACE_COUPLED_FIELDS:
                if getattr(ra, f) != getattr(rb, f):
                    failure = f"trial {j}: field {f} diverges at t={ra.t}"
                    break
            if failure:
                break
            bonus = c / (1.0 - gamma_q) if rb.state == TERMINAL else c
            if rb.reward != ra.reward + bonus:
                failure = f"trial {j}: agent reward off its exact bonus at t={ra.t}"
                break
        if failure:
            break
        q_dev = abs((_trial_objective(paired, q_spec, i_max)
                     - _trial_objective(plain, q_spec, i_max)) - expected)
        p_dev = abs(_trial_objective(paired, p_spec, i_max)
                    - _trial_objective(plain, p_spec, i_max))
        max_q_dev = max(max_q_dev, q_dev)
        max_p_dev = max(max_p_dev, p_dev)
        scale = max(1.0, abs(expected))
        if q_dev > 1e-9 * scale:
            failure = f"trial {j}: qualia shift off by {q_dev:.3e} (relative tol 1e-9)"
            break
        if p_dev != 0.0:
            failure = f"trial {j}: performance shifted by {p_dev:.3e}, expected exactly 0"
            break
    return ExploitReport(
        env=env.name, c=c, gamma_q=gamma_q, i_max=i_max, trials=trials,
        passed=failure is None,
        max_qualia_deviation=max_q_dev,
        max_performance_deviation=max_p_dev,
        expected_qualia_shift=expected,
        failure=failure,
    )
