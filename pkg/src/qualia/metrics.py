"""Monte Carlo estimators for objectives and per-episode statistics.

Estimators come in two layers.  Trace-level functions
(`performance_objective`, `reward_qualia`, `tde_qualia`,
`reinforcement_qualia`, `entropy_qualia`) map a set of traces to an
estimate with its standard error.  The statistics layer reduces
per-trial summaries (one `TrialSummary` per trial, produced either from
a trace or directly by the fast simulation path) into an
`AggregateResult` holding per-episode learning curves, signal averages,
and banded histograms.

Summation discipline: per-trial values are plain left-to-right sums, so
the trace path and the fast path agree bitwise; cross-trial reductions
use compensated (Kahan) summation in trial order, so results are
deterministic and independent of worker count.

Convention notes.  Per-episode TD-error and likelihood-ratio averages
run over every standard update of the episode, including the final one
at the terminal perception; the TD-error objective sums stop one step
earlier.  The TD error reported in statistics is the actor-effective
signal: the stored TD error minus a configurable offset (the
reinforcement baseline, plus the bonus when the actor update inverts
it), which is the quantity the learning figures plot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .process import Trace
from .agents import FullMemoryView, softmax_prob

OBJECTIVE_KINDS = (
    "performance",
    "reward_qualia",
    "tde_explicit",
    "tde_implicit",
    "reinf_sum",
    "reinf_per_step",
    "reinf_recent_sum",
    "reinf_recent_per_step",
    "entropy_perception",
)


@dataclass(frozen=True)
class ObjectiveSpec:
    """Which objective to estimate and with what weighting.

    ``capital_lambda`` is the recency discount of the recent-behavior
    variants; ``i_max`` of None means all episodes of the run.
    """

    kind: str
    gamma_q: float = 1.0
    capital_lambda: float = 0.0
    i_max: Optional[int] = None

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if not (0.0 <= self.gamma_q <= 1.0):
            raise ValueError("gamma_q must be in [0, 1]")
        if not (0.0 <= self.capital_lambda <= 1.0):
            raise ValueError("capital_lambda must be in [0, 1]")


class BandSpec(NamedTuple):
    """Histogram bands from interior edges.

    The first ``le_count`` edges close their band on the right
    ((lo, edge]); the remaining edges open it ([edge, hi)).  With the
    default TD-error edges this yields
    (-inf,-5], (-5,-1], (-1,-1e-06], (-1e-06,1e-06], (1e-06,1), [1,5), [5,inf):
    bands closed toward the central near-zero band, whose width comes
    from the figure captions.
    """

    edges: tuple
    le_count: int

    @property
    def labels(self) -> tuple:
        lo = ["-inf"] + [repr(e) for e in self.edges]
        hi = [repr(e) for e in self.edges] + ["inf"]
        out = []
        for k in range(len(self.edges) + 1):
            left_open = "(" if (k == 0 or k <= self.le_count) else "["
            right_closed = "]" if k < self.le_count else ")"
            out.append(f"{left_open}{lo[k]},{hi[k]}{right_closed}")
        return tuple(out)

    def bin_of(self, x: float) -> int:
        for k in range(self.le_count):
            if x <= self.edges[k]:
                return k
        for k in range(self.le_count, len(self.edges)):
            if x < self.edges[k]:
                return k
        return len(self.edges)


DELTA_BANDS = BandSpec(edges=(-5.0, -1.0, -1e-6, 1e-6, 1.0, 5.0), le_count=4)
L_BANDS = BandSpec(edges=(0.2, 0.5, 1.0 - 1e-6, 1.0 + 1e-6, 2.0, 5.0), le_count=4)


def fast_binner(bands: BandSpec):
    """Branch-tree binner for the common 7-band shape; falls back to
    the linear scan for other shapes.  Agrees with ``BandSpec.bin_of``
    on every input."""
    if len(bands.edges) != 6 or bands.le_count != 4:
        return bands.bin_of
    e0, e1, e2, e3, e4, e5 = bands.edges

    def bin7(x: float) -> int:
        if x <= e3:
            if x <= e1:
                return 0 if x <= e0 else 1
            return 2 if x <= e2 else 3
        if x < e4:
            return 4
        return 5 if x < e5 else 6

    return bin7


class _Kahan:
    """Compensated elementwise summation over a fixed-shape array."""

    __slots__ = ("total", "_c")

    def __init__(self, shape):
        self.total = np.zeros(shape)
        self._c = np.zeros(shape)

    def add(self, x):
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


@dataclass
class TrialSummary:
    """Per-trial, per-episode reductions of one run.

    ``delta_sum``/``l_sum`` accumulate the reported TD error and
    likelihood ratio over the episode's standard updates;
    ``update_count`` is the number of those updates (the episode
    length).  ``objectives`` holds this trial's value of each requested
    per-trial objective.  ``slot_counts`` maps
    (episode, dur, state, reward) to occurrence counts when the
    perception-entropy objective is requested.
    """

    returns: np.ndarray
    delta_sum: np.ndarray
    l_sum: np.ndarray
    update_count: np.ndarray
    delta_bins: np.ndarray
    l_bins: np.ndarray
    delta_neg: np.ndarray
    objectives: dict
    window_mean: Optional[float] = None
    slot_counts: Optional[dict] = None


@dataclass
class AggregateResult:
    """Cross-trial statistics per episode plus objective estimates.

    Histogram proportions per (episode, metric) sum to one; ``n_trials``
    applies to every per-episode row.
    """

    n_trials: int
    i_max: int
    returns_mean: np.ndarray
    returns_std: np.ndarray
    returns_stderr: np.ndarray
    delta_mean: np.ndarray
    delta_stderr: np.ndarray
    l_mean: np.ndarray
    l_stderr: np.ndarray
    delta_band_props: np.ndarray
    l_band_props: np.ndarray
    delta_neg_prop: np.ndarray
    update_totals: np.ndarray
    delta_bands: BandSpec
    l_bands: BandSpec
    objective_estimates: dict = field(default_factory=dict)
    window_stats: Optional[tuple] = None  # (mean, stderr) of the episode-window return
    entropy_estimates: dict = field(default_factory=dict)

    @property
    def per_episode(self):
        """Rows (episode, mean, std_dev, std_err, n) for the returns."""
        return [
            (i, self.returns_mean[i], self.returns_std[i], self.returns_stderr[i], self.n_trials)
            for i in range(self.i_max)
        ]


# ---------------------------------------------------------------------------
# Per-trial summaries from traces


def _require_episodes(trace: Trace, i_max: Optional[int]) -> int:
    n = len(trace.episodes)
    if i_max is None:
        return n
    if n < i_max:
        raise ValueError(f"trace has {n} episodes, fewer than i_max={i_max}")
    return i_max


def trial_return(trace: Trace, i: int, gamma: float = 1.0, base: bool = False) -> float:
    """Episode return, optionally on base rewards (interface runs)."""
    ep = trace.episodes[i]
    total = 0.0
    for t in range(ep.start + 1, ep.end + 1):
        rec = trace.steps[t]
        r = rec.base_reward if base and rec.base_reward is not None else rec.reward
        total += gamma ** (t - (ep.start + 1)) * r
    return total


def summarize_trace(
    trace: Trace,
    i_max: Optional[int] = None,
    delta_bands: BandSpec = DELTA_BANDS,
    l_bands: BandSpec = L_BANDS,
    objectives: Sequence[ObjectiveSpec] = (),
    delta_offset: float = 0.0,
    window: Optional[tuple] = None,
) -> TrialSummary:
    """Reduce one trace to its per-episode summary.

    ``delta_offset`` converts the stored TD error into the reported
    actor-effective signal (reported = stored - offset).
    """
    i_max = _require_episodes(trace, i_max)
    nb_d, nb_l = len(delta_bands.edges) + 1, len(l_bands.edges) + 1
    returns = np.zeros(i_max)
    delta_sum = np.zeros(i_max)
    l_sum = np.zeros(i_max)
    counts = np.zeros(i_max, dtype=np.int64)
    dbins = np.zeros((i_max, nb_d), dtype=np.int64)
    lbins = np.zeros((i_max, nb_l), dtype=np.int64)
    dneg = np.zeros(i_max, dtype=np.int64)
    want_entropy = any(o.kind == "entropy_perception" for o in objectives)
    slots = {} if want_entropy else None

    for i in range(i_max):
        ep = trace.episodes[i]
        ret = 0.0
        dsum = 0.0
        lsum = 0.0
        for t in range(ep.start + 1, ep.end + 1):
            rec = trace.steps[t]
            r = rec.base_reward if rec.base_reward is not None else rec.reward
            ret += r
            if rec.td_error is None or rec.likelihood_ratio is None:
                raise ValueError("trace lacks recorded learning signals")
            d = rec.td_error - delta_offset
            L = rec.likelihood_ratio
            dsum += d
            lsum += L
            dbins[i, delta_bands.bin_of(d)] += 1
            lbins[i, l_bands.bin_of(L)] += 1
            if d < 0.0:
                dneg[i] += 1
            if slots is not None:
                key = (i, t - (ep.start + 1), rec.perception, rec.reward)
                slots[key] = slots.get(key, 0) + 1
        returns[i] = ret
        delta_sum[i] = dsum
        l_sum[i] = lsum
        counts[i] = ep.len

    obj_values = {}
    for spec in objectives:
        if spec.kind == "entropy_perception":
            continue  # cross-trial; reduced from slot counts
        obj_values[spec] = _trial_objective(trace, spec, spec.i_max or i_max)

    wmean = None
    if window is not None:
        lo, hi = window
        wmean = float(returns[lo:hi].mean())
    return TrialSummary(returns, delta_sum, l_sum, counts, dbins, lbins, dneg,
                        obj_values, wmean, slots)


def _trial_objective(trace: Trace, spec: ObjectiveSpec, i_max: int) -> float:
    kind = spec.kind
    gq = spec.gamma_q
    total = 0.0
    if kind == "performance":
        for i in range(i_max):
            total += trial_return(trace, i, 1.0, base=True)
        return total
    if kind == "reward_qualia":
        for i in range(i_max):
            ep = trace.episodes[i]
            q = 0.0
            for t in range(ep.start + 1, ep.end + 1):
                q += gq ** (t - (ep.start + 1)) * trace.steps[t].reward
            total += q
        return total
    if kind in ("tde_explicit", "tde_implicit"):
        explicit = kind == "tde_explicit"
        for i in range(i_max):
            ep = trace.episodes[i]
            q = 0.0
            for t in range(ep.start + 1, ep.end):
                rec = trace.steps[t]
                d = rec.td_error if explicit else rec.td_error_raw
                if d is None:
                    raise ValueError("trace lacks recorded TD errors")
                q += gq ** (t - (ep.start + 1)) * d
            total += q
        return total
    if kind in ("reinf_sum", "reinf_per_step"):
        for i in range(i_max):
            ep = trace.episodes[i]
            s = 0.0
            for t in range(ep.start + 1, ep.end + 1):
                L = trace.steps[t].likelihood_ratio
                if L is None:
                    raise ValueError("trace lacks recorded likelihood ratios")
                s += L
            total += s / ep.len if kind == "reinf_per_step" else s
        return total
    if kind in ("reinf_recent_sum", "reinf_recent_per_step"):
        return _trial_recent_reinforcement(trace, spec, i_max)
    raise ValueError(f"objective {kind!r} has no per-trial value")


def _trial_recent_reinforcement(trace: Trace, spec: ObjectiveSpec, i_max: int) -> float:
    """Recent-behavior reinforcement from full memory snapshots.

    The update at trace time u reweights every action back to the
    episode start: sum over k <= u-1 of Lambda^(u-1-k) times the
    probability ratio of (S_k, A_k) under the policy after/before the
    update.
    """
    lam = spec.capital_lambda
    total = 0.0
    for i in range(i_max):
        ep = trace.episodes[i]
        s = 0.0
        for u in range(ep.start + 1, ep.end + 1):
            snap_new = trace.steps[u].memory_snapshot
            snap_old = trace.steps[u - 1].memory_snapshot
            if not isinstance(snap_new, FullMemoryView) or not isinstance(snap_old, FullMemoryView):
                raise ValueError(
                    "recent-behavior estimators need full memory snapshots; "
                    "run the agent with snapshot_mode='full'"
                )
            for k in range(ep.start, u):
                rec = trace.steps[k]
                ratio = (softmax_prob(snap_new.theta, rec.state, rec.action)
                         / softmax_prob(snap_old.theta, rec.state, rec.action))
                s += lam ** ((u - 1) - k) * ratio
        total += s / ep.len if spec.kind == "reinf_recent_per_step" else s
    return total


# ---------------------------------------------------------------------------
# Cross-trial reduction


class SummaryAccumulator:
    """Orderly cross-trial reduction of trial summaries.

    Floating accumulators are compensated; counts are exact integers.
    Accumulation order (trial order within a chunk, chunk order across
    chunks) is fixed by the configuration, never by scheduling.
    """

    def __init__(self, i_max: int, delta_bands: BandSpec = DELTA_BANDS,
                 l_bands: BandSpec = L_BANDS, objectives: Sequence[ObjectiveSpec] = (),
                 window: Optional[tuple] = None):
        self.i_max = i_max
        self.delta_bands = delta_bands
        self.l_bands = l_bands
        self.objectives = tuple(objectives)
        self.window = window
        self.n = 0
        self._ret = _Kahan(i_max)
        self._ret_sq = _Kahan(i_max)
        self._dmean = _Kahan(i_max)
        self._dmean_sq = _Kahan(i_max)
        self._lmean = _Kahan(i_max)
        self._lmean_sq = _Kahan(i_max)
        self._counts = np.zeros(i_max, dtype=np.int64)
        self._dbins = np.zeros((i_max, len(delta_bands.edges) + 1), dtype=np.int64)
        self._lbins = np.zeros((i_max, len(l_bands.edges) + 1), dtype=np.int64)
        self._dneg = np.zeros(i_max, dtype=np.int64)
        self._obj = {s: _Kahan(()) for s in self.objectives if s.kind != "entropy_perception"}
        self._obj_sq = {s: _Kahan(()) for s in self._obj}
        self._win = _Kahan(()) if window else None
        self._win_sq = _Kahan(()) if window else None
        self._slots: dict = {}

    def add(self, s: TrialSummary) -> None:
        self.n += 1
        self._ret.add(s.returns)
        self._ret_sq.add(s.returns * s.returns)
        dmean = s.delta_sum / s.update_count
        lmean = s.l_sum / s.update_count
        self._dmean.add(dmean)
        self._dmean_sq.add(dmean * dmean)
        self._lmean.add(lmean)
        self._lmean_sq.add(lmean * lmean)
        self._counts += s.update_count
        self._dbins += s.delta_bins
        self._lbins += s.l_bins
        self._dneg += s.delta_neg
        for spec, acc in self._obj.items():
            v = s.objectives[spec]
            acc.add(v)
            self._obj_sq[spec].add(v * v)
        if self._win is not None:
            self._win.add(s.window_mean)
            self._win_sq.add(s.window_mean * s.window_mean)
        if s.slot_counts:
            for key, c in s.slot_counts.items():
                self._slots[key] = self._slots.get(key, 0) + c

    def merge(self, other: "SummaryAccumulator") -> None:
        """Fold another accumulator in (chunk-order combination)."""
        self.n += other.n
        for mine, theirs in (
            (self._ret, other._ret), (self._ret_sq, other._ret_sq),
            (self._dmean, other._dmean), (self._dmean_sq, other._dmean_sq),
            (self._lmean, other._lmean), (self._lmean_sq, other._lmean_sq),
        ):
            mine.add(theirs.total)
        self._counts += other._counts
        self._dbins += other._dbins
        self._lbins += other._lbins
        self._dneg += other._dneg
        for spec in self._obj:
            self._obj[spec].add(other._obj[spec].total)
            self._obj_sq[spec].add(other._obj_sq[spec].total)
        if self._win is not None:
            self._win.add(other._win.total)
            self._win_sq.add(other._win_sq.total)
        for key, c in other._slots.items():
            self._slots[key] = self._slots.get(key, 0) + c

    def result(self) -> AggregateResult:
        if self.n < 2:
            raise ValueError("cross-trial statistics need at least 2 trials")
        n = self.n

        def stats(sum_, sq_):
            mean = sum_.total / n
            var = (sq_.total - n * mean * mean) / (n - 1)
            std = np.sqrt(np.maximum(var, 0.0))
            return mean, std, std / math.sqrt(n)

        r_mean, r_std, r_se = stats(self._ret, self._ret_sq)
        d_mean, _, d_se = stats(self._dmean, self._dmean_sq)
        l_mean, _, l_se = stats(self._lmean, self._lmean_sq)
        counts = self._counts.astype(float)
        res = AggregateResult(
            n_trials=n,
            i_max=self.i_max,
            returns_mean=r_mean, returns_std=r_std, returns_stderr=r_se,
            delta_mean=d_mean, delta_stderr=d_se,
            l_mean=l_mean, l_stderr=l_se,
            delta_band_props=self._dbins / counts[:, None],
            l_band_props=self._lbins / counts[:, None],
            delta_neg_prop=self._dneg / counts,
            update_totals=self._counts.copy(),
            delta_bands=self.delta_bands,
            l_bands=self.l_bands,
        )
        for spec, acc in self._obj.items():
            mean = acc.total / n
            var = (self._obj_sq[spec].total - n * mean * mean) / (n - 1)
            res.objective_estimates[spec] = (float(mean), math.sqrt(max(var, 0.0) / n))
        if self._win is not None:
            mean = self._win.total / n
            var = (self._win_sq.total - n * mean * mean) / (n - 1)
            res.window_stats = (float(mean), math.sqrt(max(var, 0.0) / n))
        for spec in self.objectives:
            if spec.kind == "entropy_perception":
                est = entropy_from_slots(self._slots, spec.gamma_q, n)
                res.entropy_estimates[spec] = est
        return res


def episode_statistics(
    traces: Sequence[Trace],
    i_max: Optional[int] = None,
    delta_bands: BandSpec = DELTA_BANDS,
    l_bands: BandSpec = L_BANDS,
    objectives: Sequence[ObjectiveSpec] = (),
    delta_offset: float = 0.0,
    window: Optional[tuple] = None,
) -> AggregateResult:
    """Cross-trial per-episode statistics of a set of traces."""
    if len(traces) < 2:
        raise ValueError("cross-trial statistics need at least 2 trials")
    i_max = _require_episodes(traces[0], i_max)
    acc = SummaryAccumulator(i_max, delta_bands, l_bands, objectives, window)
    for trace in traces:
        acc.add(summarize_trace(trace, i_max, delta_bands, l_bands, objectives,
                                delta_offset, window))
    return acc.result()


# ---------------------------------------------------------------------------
# Trace-level objective estimators


def _mean_stderr(values: Sequence[float]) -> tuple:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, float("nan")
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def performance_objective(traces: Sequence[Trace], i_max: Optional[int] = None) -> tuple:
    """Expected undiscounted return summed over i_max episodes.

    Computed on base rewards for interface-mediated traces: performance
    is a property of the interaction with the base environment.
    """
    values = []
    for trace in traces:
        m = _require_episodes(trace, i_max)
        total = 0.0
        for i in range(m):
            total += trial_return(trace, i, 1.0, base=True)
        values.append(total)
    return _mean_stderr(values)


def reward_qualia(traces: Sequence[Trace], gamma_q: float, i_max: Optional[int] = None) -> tuple:
    """Expected gamma_q-discounted sum of agent rewards over i_max episodes."""
    spec = ObjectiveSpec("reward_qualia", gamma_q=gamma_q)
    values = []
    for trace in traces:
        m = _require_episodes(trace, i_max)
        values.append(_trial_objective(trace, spec, m))
    return _mean_stderr(values)


def tde_qualia(traces: Sequence[Trace], gamma_q: float, mode: str = "explicit",
               i_max: Optional[int] = None) -> tuple:
    """Expected discounted sum of TD errors over each episode's interior.

    mode="explicit" sums the stored TD error (bonus included);
    mode="implicit" sums the raw expression reward + gamma*v(new) - v(old).
    """
    if mode not in ("explicit", "implicit"):
        raise ValueError("mode must be 'explicit' or 'implicit'")
    spec = ObjectiveSpec(f"tde_{mode}", gamma_q=gamma_q)
    values = []
    for trace in traces:
        m = _require_episodes(trace, i_max)
        values.append(_trial_objective(trace, spec, m))
    return _mean_stderr(values)


def reinforcement_qualia(traces: Sequence[Trace], spec: ObjectiveSpec) -> tuple:
    """Likelihood-ratio reinforcement objectives (four variants).

    The instantaneous variants sum the recorded ratios per episode
    (optionally divided by episode length); the recent variants reweight
    all earlier actions of the episode and need full memory snapshots.
    """
    if not spec.kind.startswith("reinf"):
        raise ValueError(f"not a reinforcement objective: {spec.kind!r}")
    values = []
    for trace in traces:
        m = _require_episodes(trace, spec.i_max)
        values.append(_trial_objective(trace, spec, m))
    return _mean_stderr(values)


class EntropyEstimate(NamedTuple):
    estimate: float
    warning: Optional[str]


def entropy_from_slots(slots: dict, gamma_q: float, n_trials: int) -> EntropyEstimate:
    """Discounted sum of plug-in perception entropies over aligned slots.

    Slots align episodes across trials by (episode, steps-into-episode);
    each slot's distribution is the empirical cross-trial distribution of
    the perception (state and reward jointly).  Natural-log internals,
    bits at the boundary.
    """
    by_slot: dict = {}
    for (i, d, state, reward), c in slots.items():
        by_slot.setdefault((i, d), []).append(c)
    total = 0.0
    for (i, d), counts in sorted(by_slot.items()):
        n = sum(counts)
        h = 0.0
        for c in counts:
            p = c / n
            h -= p * math.log(p)
        total += gamma_q**d * (h / math.log(2.0))
    warning = None
    if n_trials < 100:
        warning = (f"plug-in entropy over {n_trials} trials is strongly biased; "
                   "use at least 100 trials")
    return EntropyEstimate(total, warning)


def entropy_qualia(traces: Sequence[Trace], gamma_q: float,
                   i_max: Optional[int] = None) -> EntropyEstimate:
    """Perception-entropy objective estimated across a set of traces."""
    slots: dict = {}
    for trace in traces:
        m = _require_episodes(trace, i_max)
        for i in range(m):
            ep = trace.episodes[i]
            for t in range(ep.start + 1, ep.end + 1):
                rec = trace.steps[t]
                key = (i, t - (ep.start + 1), rec.perception, rec.reward)
                slots[key] = slots.get(key, 0) + 1
    return entropy_from_slots(slots, gamma_q, len(traces))
