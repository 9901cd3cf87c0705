"""Experiment orchestration: config, parallel seeded trials, CSV output.

A run sweeps the reinforcement-baseline constant over `baseline_values`;
for each value it simulates `trials` independent learners, reduces them
to per-episode statistics, and writes four CSV files plus a JSON
manifest.  Reproducibility contract: per-trial Philox streams are
derived from (master_seed, sweep index, trial index); trials are
reduced in fixed-size chunks in chunk order, so byte-identical output
is produced for a given config regardless of worker count.

Two simulation paths produce the per-trial summaries.  Identity-interface
runs of the tabular learner on a table-driven environment take the fast
inlined loop below, which mirrors `agents.bac_step` expression for
expression (a test asserts bitwise-identical summaries).  Anything else
(non-identity interfaces, recent-behavior objectives) falls back to the
general trace engine.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .agents import BacAgent, BacConfig
from .environments import by_name
from .interfaces import by_spec, wrap_inverse
from .metrics import (
    DELTA_BANDS,
    L_BANDS,
    AggregateResult,
    BandSpec,
    ObjectiveSpec,
    SummaryAccumulator,
    TrialSummary,
    fast_binner,
    summarize_trace,
)
from .process import run_aierp
from .rng import BLOCK_SIZE, GENERATOR_NAME, UniformStream, trial_key

#: Trials per reduction chunk; part of the determinism contract, never
#: a function of the worker count.
CHUNK = 256


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment sweep."""

    environment: str
    agent: BacConfig
    baseline_values: tuple = (0.0,)
    i_max: int = 500
    trials: int = 10_000
    master_seed: int = 0
    aei_kind: str = "identity"
    aei_params: dict = field(default_factory=dict)
    apply_inverter: bool = False
    delta_bands: BandSpec = DELTA_BANDS
    l_bands: BandSpec = L_BANDS
    objectives: tuple = (ObjectiveSpec("performance"),)
    episode_window: Optional[tuple] = None
    output_dir: Optional[str] = None
    threads: Optional[int] = None

    def __post_init__(self):
        if self.trials < 2:
            raise ConfigError("trials must be >= 2")
        if self.i_max < 1:
            raise ConfigError("i_max must be >= 1")
        if not self.baseline_values:
            raise ConfigError("baseline_values must be non-empty")
        if self.episode_window is not None:
            lo, hi = self.episode_window
            if not (0 <= lo < hi <= self.i_max):
                raise ConfigError(f"episode_window {self.episode_window} outside [0, i_max]")


def default_agent_config(environment: str) -> BacConfig:
    """Per-environment defaults used throughout the experiments."""
    if environment == "gridworld":
        return BacConfig(alpha=0.1, beta=0.01, gamma=1.0, lam=0.8)
    if environment == "chain":
        return BacConfig(alpha=0.1, beta=0.1, gamma=1.0, lam=0.8)
    return BacConfig(alpha=0.1, beta=0.1, gamma=1.0, lam=0.8)


def _delta_offset(cfg: BacConfig) -> float:
    """Offset turning the stored TD error into the reported actor signal."""
    return cfg.baseline_c + (cfg.td_bonus if cfg.td_bonus_invert_actor else 0.0)


# ---------------------------------------------------------------------------
# Fast per-trial simulation (identity interface, table-driven environment)


def _fast_trial(env, cfg: BacConfig, i_max: int, key, delta_bands: BandSpec,
                l_bands: BandSpec, objectives: Sequence[ObjectiveSpec],
                window: Optional[tuple], delta_offset: float) -> TrialSummary:
    """One trial without trace allocation.

    Mirrors `bac_step` expression for expression and consumes uniforms
    through the same buffered stream, so its per-episode summaries are
    bitwise identical to summarizing a trace of the general engine.
    Four-action environments take a fully unrolled variant of the same
    arithmetic.
    """
    impl = _fast_trial4 if env.action_count == 4 else _fast_trial_any
    return impl(env, cfg, i_max, key, delta_bands, l_bands, objectives,
                window, delta_offset)


def _objective_plans(objectives: Sequence[ObjectiveSpec]):
    step_plan = []
    episode_plan = []
    for spec in objectives:
        if spec.kind.startswith("reinf_recent"):
            raise ValueError("recent-behavior objectives need the trace engine")
        if spec.kind == "entropy_perception":
            continue
        if spec.kind in ("reward_qualia", "tde_explicit", "tde_implicit"):
            step_plan.append((spec, spec.kind, spec.gamma_q))
        else:
            episode_plan.append((spec, spec.kind))
    obj_totals = {spec: 0.0 for spec in objectives if spec.kind != "entropy_perception"}
    want_slots = any(s.kind == "entropy_perception" for s in objectives)
    return step_plan, episode_plan, obj_totals, want_slots


def _finish_summary(i_max, returns, delta_sums, l_sums, counts, dbins, lbins,
                    dneg, obj_totals, window, slots) -> TrialSummary:
    wmean = None
    if window is not None:
        lo, hi = window
        wmean = float(np.asarray(returns[lo:hi]).mean())
    return TrialSummary(
        returns=np.asarray(returns),
        delta_sum=np.asarray(delta_sums),
        l_sum=np.asarray(l_sums),
        update_count=np.asarray(counts, dtype=np.int64),
        delta_bins=np.asarray(dbins, dtype=np.int64),
        l_bins=np.asarray(lbins, dtype=np.int64),
        delta_neg=np.asarray(dneg, dtype=np.int64),
        objectives=obj_totals,
        window_mean=wmean,
        slot_counts=slots,
    )


def _fast_trial_any(env, cfg: BacConfig, i_max: int, key, delta_bands: BandSpec,
                    l_bands: BandSpec, objectives: Sequence[ObjectiveSpec],
                    window: Optional[tuple], delta_offset: float) -> TrialSummary:
    exp = math.exp
    table = env.table
    reward_fn = env.reward_fn
    s0 = env.initial_state()
    terminal_id = -1  # process.TERMINAL

    n_states = env.state_count
    n_actions = env.action_count
    a_range = range(n_actions)

    gamma = cfg.gamma
    gl = gamma * cfg.lam
    alpha = cfg.alpha
    beta = cfg.beta
    baseline = cfg.baseline_c
    bonus = cfg.td_bonus
    clip_tau = cfg.clip_tau
    inv_c = cfg.td_bonus_invert_critic
    inv_a = cfg.td_bonus_invert_actor
    freeze = cfg.freeze_critic

    from .agents import _as_table, _as_vector

    theta = _as_table(cfg.theta0, n_states, n_actions)
    w = _as_vector(cfg.w0, n_states)
    e = [0.0] * n_states
    active: list = []
    in_active = [False] * n_states

    stream = UniformStream(key)
    buf = stream.block()
    buf_i = 0

    bin_d = fast_binner(delta_bands)
    bin_l = fast_binner(l_bands)
    nb_d = len(delta_bands.edges) + 1
    nb_l = len(l_bands.edges) + 1

    returns = [0.0] * i_max
    delta_sums = [0.0] * i_max
    l_sums = [0.0] * i_max
    counts = [0] * i_max
    dbins = [[0] * nb_d for _ in range(i_max)]
    lbins = [[0] * nb_l for _ in range(i_max)]
    dneg = [0] * i_max

    step_plan, episode_plan, obj_totals, want_slots = _objective_plans(objectives)
    slots: Optional[dict] = {} if want_slots else None

    for i in range(i_max):
        # episode start: clear traces, draw the initial state
        for s in active:
            e[s] = 0.0
            in_active[s] = False
        active = []
        state = s0
        ret = 0.0
        dsum = 0.0
        lsum = 0.0
        steps = 0
        ep_bins_d = dbins[i]
        ep_bins_l = lbins[i]
        ep_obj = [0.0] * len(step_plan)
        # sample the first action of the episode
        row = theta[state]
        m = max(row)
        exps = [exp(x - m) for x in row]
        z = 0.0
        for v in exps:
            z += v
        probs = [v / z for v in exps]
        if buf_i == BLOCK_SIZE:
            buf = stream.block()
            buf_i = 0
        u = buf[buf_i]
        buf_i += 1
        acc = 0.0
        action = n_actions - 1
        for a in a_range:
            acc += probs[a]
            if u < acc:
                action = a
                break
        while True:
            # environment transition and reward
            prev_state = state
            prev_action = action
            prev_probs = probs
            state = table[prev_state][prev_action]
            terminal = state == terminal_id
            r = reward_fn(prev_state, state)
            d = steps  # dur(t) of this reward time
            steps += 1
            ret += r

            # standard update
            v_new = 0.0 if terminal else w[state]
            delta_raw = r + gamma * v_new - w[prev_state]
            delta = delta_raw + bonus
            if clip_tau is not None:
                delta = max(clip_tau, delta)
            if inv_c:
                delta_c = delta_raw if clip_tau is None else delta - bonus
            else:
                delta_c = delta
            if inv_a:
                delta_a = delta_raw if clip_tau is None else delta - bonus
            else:
                delta_a = delta

            if not freeze:
                for s in active:
                    e[s] = e[s] * gl
                if not in_active[prev_state]:
                    active.append(prev_state)
                    in_active[prev_state] = True
                e[prev_state] += 1.0
                ad = alpha * delta_c
                for s in active:
                    w[s] = w[s] + ad * e[s]

            bd = beta * (delta_a - baseline)
            row = theta[prev_state]
            new_row = [x - bd * p for x, p in zip(row, prev_probs)]
            new_row[prev_action] += bd
            theta[prev_state] = new_row
            m = max(new_row)
            exps = [exp(x - m) for x in new_row]
            z = 0.0
            for v in exps:
                z += v
            ratio = (exps[prev_action] / z) / prev_probs[prev_action]

            # statistics on the reported (actor-effective) signal
            rep = delta - delta_offset
            dsum += rep
            lsum += ratio
            ep_bins_d[bin_d(rep)] += 1
            ep_bins_l[bin_l(ratio)] += 1
            if rep < 0.0:
                dneg[i] += 1

            # per-trial objectives (per-episode partials, folded at episode end)
            if step_plan:
                for k, (spec, kind, gq) in enumerate(step_plan):
                    if kind == "reward_qualia":
                        ep_obj[k] += gq**d * r
                    elif not terminal:
                        if kind == "tde_explicit":
                            ep_obj[k] += gq**d * delta
                        else:
                            ep_obj[k] += gq**d * delta_raw
            if slots is not None:
                skey = (i, d, state, r)
                slots[skey] = slots.get(skey, 0) + 1

            if terminal:
                break
            # sample the next action
            row = theta[state]
            m = max(row)
            exps = [exp(x - m) for x in row]
            z = 0.0
            for v in exps:
                z += v
            probs = [v / z for v in exps]
            if buf_i == BLOCK_SIZE:
                buf = stream.block()
                buf_i = 0
            u = buf[buf_i]
            buf_i += 1
            acc = 0.0
            action = n_actions - 1
            for a in a_range:
                acc += probs[a]
                if u < acc:
                    action = a
                    break

        returns[i] = ret
        delta_sums[i] = dsum
        l_sums[i] = lsum
        counts[i] = steps
        for k, (spec, kind, gq) in enumerate(step_plan):
            obj_totals[spec] += ep_obj[k]
        for spec, kind in episode_plan:
            if kind == "performance":
                obj_totals[spec] += ret
            elif kind == "reinf_sum":
                obj_totals[spec] += lsum
            elif kind == "reinf_per_step":
                obj_totals[spec] += lsum / steps

    return _finish_summary(i_max, returns, delta_sums, l_sums, counts, dbins,
                           lbins, dneg, obj_totals, window, slots)


def _fast_trial4(env, cfg: BacConfig, i_max: int, key, delta_bands: BandSpec,
                 l_bands: BandSpec, objectives: Sequence[ObjectiveSpec],
                 window: Optional[tuple], delta_offset: float) -> TrialSummary:
    """Unrolled four-action variant of `_fast_trial_any`.

    Every expression evaluates in the same order as the generic path
    (and hence as `bac_step`), so results stay bitwise identical; only
    the interpreter overhead differs.
    """
    exp = math.exp
    table = env.table
    s0 = env.initial_state()
    n_states = env.state_count
    # rewards depend only on the transition; tabulate them once
    r_table = [[env.reward_fn(s, table[s][a]) for a in range(4)] for s in range(n_states)]

    gamma = cfg.gamma
    gl = gamma * cfg.lam
    alpha = cfg.alpha
    beta = cfg.beta
    baseline = cfg.baseline_c
    bonus = cfg.td_bonus
    clip_tau = cfg.clip_tau
    inv_c = cfg.td_bonus_invert_critic
    inv_a = cfg.td_bonus_invert_actor
    freeze = cfg.freeze_critic

    from .agents import _as_table, _as_vector

    theta = _as_table(cfg.theta0, n_states, 4)
    w = _as_vector(cfg.w0, n_states)
    e = [0.0] * n_states
    active: list = []
    in_active = [False] * n_states

    stream = UniformStream(key)
    buf = stream.block()
    buf_i = 0

    bin_d = fast_binner(delta_bands)
    bin_l = fast_binner(l_bands)
    nb_d = len(delta_bands.edges) + 1
    nb_l = len(l_bands.edges) + 1

    returns = [0.0] * i_max
    delta_sums = [0.0] * i_max
    l_sums = [0.0] * i_max
    counts = [0] * i_max
    dbins = [[0] * nb_d for _ in range(i_max)]
    lbins = [[0] * nb_l for _ in range(i_max)]
    dneg = [0] * i_max

    step_plan, episode_plan, obj_totals, want_slots = _objective_plans(objectives)
    slots: Optional[dict] = {} if want_slots else None

    for i in range(i_max):
        for s in active:
            e[s] = 0.0
            in_active[s] = False
        active = []
        state = s0
        ret = 0.0
        dsum = 0.0
        lsum = 0.0
        steps = 0
        ep_bins_d = dbins[i]
        ep_bins_l = lbins[i]
        ep_obj = [0.0] * len(step_plan)

        t0, t1, t2, t3 = theta[state]
        m = t0
        if t1 > m:
            m = t1
        if t2 > m:
            m = t2
        if t3 > m:
            m = t3
        e0 = exp(t0 - m)
        e1 = exp(t1 - m)
        e2 = exp(t2 - m)
        e3 = exp(t3 - m)
        z = e0 + e1 + e2 + e3
        pp0 = e0 / z
        pp1 = e1 / z
        pp2 = e2 / z
        pp3 = e3 / z
        if buf_i == BLOCK_SIZE:
            buf = stream.block()
            buf_i = 0
        u = buf[buf_i]
        buf_i += 1
        if u < pp0:
            action = 0
        else:
            c = pp0 + pp1
            if u < c:
                action = 1
            else:
                c = c + pp2
                action = 2 if u < c else 3

        while True:
            prev_state = state
            prev_action = action
            state = table[prev_state][prev_action]
            terminal = state == -1
            r = r_table[prev_state][prev_action]
            d = steps
            steps += 1
            ret += r

            v_new = 0.0 if terminal else w[state]
            delta_raw = r + gamma * v_new - w[prev_state]
            delta = delta_raw + bonus
            if clip_tau is not None:
                delta = max(clip_tau, delta)
            if inv_c:
                delta_c = delta_raw if clip_tau is None else delta - bonus
            else:
                delta_c = delta
            if inv_a:
                delta_a = delta_raw if clip_tau is None else delta - bonus
            else:
                delta_a = delta

            if not freeze:
                for s in active:
                    e[s] = e[s] * gl
                if not in_active[prev_state]:
                    active.append(prev_state)
                    in_active[prev_state] = True
                e[prev_state] += 1.0
                ad = alpha * delta_c
                for s in active:
                    w[s] = w[s] + ad * e[s]

            bd = beta * (delta_a - baseline)
            r0, r1, r2, r3 = theta[prev_state]
            n0 = r0 - bd * pp0
            n1 = r1 - bd * pp1
            n2 = r2 - bd * pp2
            n3 = r3 - bd * pp3
            if prev_action == 0:
                n0 += bd
                ppa = pp0
            elif prev_action == 1:
                n1 += bd
                ppa = pp1
            elif prev_action == 2:
                n2 += bd
                ppa = pp2
            else:
                n3 += bd
                ppa = pp3
            theta[prev_state] = [n0, n1, n2, n3]
            m = n0
            if n1 > m:
                m = n1
            if n2 > m:
                m = n2
            if n3 > m:
                m = n3
            f0 = exp(n0 - m)
            f1 = exp(n1 - m)
            f2 = exp(n2 - m)
            f3 = exp(n3 - m)
            z = f0 + f1 + f2 + f3
            if prev_action == 0:
                fa = f0
            elif prev_action == 1:
                fa = f1
            elif prev_action == 2:
                fa = f2
            else:
                fa = f3
            ratio = (fa / z) / ppa

            rep = delta - delta_offset
            dsum += rep
            lsum += ratio
            ep_bins_d[bin_d(rep)] += 1
            ep_bins_l[bin_l(ratio)] += 1
            if rep < 0.0:
                dneg[i] += 1

            if step_plan:
                for k, (spec, kind, gq) in enumerate(step_plan):
                    if kind == "reward_qualia":
                        ep_obj[k] += gq**d * r
                    elif not terminal:
                        if kind == "tde_explicit":
                            ep_obj[k] += gq**d * delta
                        else:
                            ep_obj[k] += gq**d * delta_raw
            if slots is not None:
                skey = (i, d, state, r)
                slots[skey] = slots.get(skey, 0) + 1

            if terminal:
                break

            t0, t1, t2, t3 = theta[state]
            m = t0
            if t1 > m:
                m = t1
            if t2 > m:
                m = t2
            if t3 > m:
                m = t3
            e0 = exp(t0 - m)
            e1 = exp(t1 - m)
            e2 = exp(t2 - m)
            e3 = exp(t3 - m)
            z = e0 + e1 + e2 + e3
            pp0 = e0 / z
            pp1 = e1 / z
            pp2 = e2 / z
            pp3 = e3 / z
            if buf_i == BLOCK_SIZE:
                buf = stream.block()
                buf_i = 0
            u = buf[buf_i]
            buf_i += 1
            if u < pp0:
                action = 0
            else:
                c = pp0 + pp1
                if u < c:
                    action = 1
                else:
                    c = c + pp2
                    action = 2 if u < c else 3

        returns[i] = ret
        delta_sums[i] = dsum
        l_sums[i] = lsum
        counts[i] = steps
        for k, (spec, kind, gq) in enumerate(step_plan):
            obj_totals[spec] += ep_obj[k]
        for spec, kind in episode_plan:
            if kind == "performance":
                obj_totals[spec] += ret
            elif kind == "reinf_sum":
                obj_totals[spec] += lsum
            elif kind == "reinf_per_step":
                obj_totals[spec] += lsum / steps

    return _finish_summary(i_max, returns, delta_sums, l_sums, counts, dbins,
                           lbins, dneg, obj_totals, window, slots)


def _general_trial(env, cfg: BacConfig, config: ExperimentConfig, key) -> TrialSummary:
    """Fallback path through the general trace engine."""
    aei, inverter = by_spec(config.aei_kind, **config.aei_params)
    needs_full = any(s.kind.startswith("reinf_recent") for s in config.objectives)
    if config.aei_kind == "constant":
        agent = BacAgent(cfg, 1, 1, snapshot_mode="full" if needs_full else "light")
    else:
        agent = BacAgent(cfg, env.state_count, env.action_count,
                         snapshot_mode="full" if needs_full else "light")
    if config.apply_inverter:
        if inverter is None:
            raise ConfigError(f"interface {config.aei_kind!r} has no inverter")
        agent = wrap_inverse(agent, inverter)
    trace = run_aierp(env, aei, agent, episodes=config.i_max, seed=key)
    return summarize_trace(trace, config.i_max, config.delta_bands, config.l_bands,
                           config.objectives, _delta_offset(cfg), config.episode_window)


def _use_fast_path(config: ExperimentConfig, env) -> bool:
    if config.aei_kind != "identity" or config.apply_inverter:
        return False
    if env.table is None or len([p for p in env.initial_distribution if p > 0]) != 1:
        return False
    return not any(s.kind.startswith("reinf_recent") for s in config.objectives)


def _run_chunk(args) -> SummaryAccumulator:
    (config, sweep_index, c, lo, hi, fast) = args
    env = by_name(config.environment)
    cfg = replace(config.agent, baseline_c=c)
    acc = SummaryAccumulator(config.i_max, config.delta_bands, config.l_bands,
                             config.objectives, config.episode_window)
    offset = _delta_offset(cfg)
    for j in range(lo, hi):
        key = trial_key(config.master_seed, sweep_index, j)
        if fast:
            acc.add(_fast_trial(env, cfg, config.i_max, key, config.delta_bands,
                                config.l_bands, config.objectives,
                                config.episode_window, offset))
        else:
            acc.add(_general_trial(env, cfg, config, key))
    return acc


def resolve_threads(threads: Optional[int]) -> int:
    if threads is not None and threads > 0:
        return threads
    env_threads = os.environ.get("QUALIA_THREADS")
    if env_threads:
        return max(1, int(env_threads))
    return os.cpu_count() or 1


def run_sweep_entry(config: ExperimentConfig, sweep_index: int, c: float,
                    threads: Optional[int] = None) -> AggregateResult:
    """Simulate all trials for one baseline value and reduce them."""
    env = by_name(config.environment)
    fast = _use_fast_path(config, env)
    chunks = [
        (config, sweep_index, c, lo, min(lo + CHUNK, config.trials), fast)
        for lo in range(0, config.trials, CHUNK)
    ]
    n_threads = resolve_threads(threads if threads is not None else config.threads)
    total = SummaryAccumulator(config.i_max, config.delta_bands, config.l_bands,
                               config.objectives, config.episode_window)
    if n_threads <= 1 or len(chunks) == 1:
        for chunk in chunks:
            total.merge(_run_chunk(chunk))
    else:
        import multiprocessing as mp

        with mp.Pool(processes=min(n_threads, len(chunks))) as pool:
            for acc in pool.imap(_run_chunk, chunks):
                total.merge(acc)
    return total.result()


def run_experiment(config: ExperimentConfig, threads: Optional[int] = None) -> dict:
    """Run the full baseline sweep; write CSVs and a manifest if configured.

    Returns {baseline value: AggregateResult}.
    """
    t0 = time.time()
    results = {}
    for k, c in enumerate(config.baseline_values):
        results[c] = run_sweep_entry(config, k, c, threads)
    if config.output_dir is not None:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csvs(config, results, out)
        manifest = {
            "config": config_to_dict(config),
            "generator": GENERATOR_NAME,
            "block_size": BLOCK_SIZE,
            "chunk": CHUNK,
            "version": __version__,
            "wall_time_s": round(time.time() - t0, 3),
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return results


# ---------------------------------------------------------------------------
# Persistence


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_csvs(config: ExperimentConfig, results: dict, out: Path) -> None:
    env = config.environment
    with open(out / "learning_curve.csv", "w") as f:
        f.write("env,baseline_c,episode,mean_return,std_return,stderr_return,n_trials\n")
        for c, res in results.items():
            for i in range(res.i_max):
                f.write(f"{env},{_fmt(c)},{i},{_fmt(res.returns_mean[i])},"
                        f"{_fmt(res.returns_std[i])},{_fmt(res.returns_stderr[i])},{res.n_trials}\n")
    with open(out / "signal_stats.csv", "w") as f:
        f.write("env,baseline_c,episode,mean_delta,stderr_delta,mean_L,stderr_L\n")
        for c, res in results.items():
            for i in range(res.i_max):
                f.write(f"{env},{_fmt(c)},{i},{_fmt(res.delta_mean[i])},"
                        f"{_fmt(res.delta_stderr[i])},{_fmt(res.l_mean[i])},{_fmt(res.l_stderr[i])}\n")
    with open(out / "histograms.csv", "w") as f:
        f.write("env,baseline_c,episode,metric,bin_label,proportion\n")
        for c, res in results.items():
            for i in range(res.i_max):
                for label, p in zip(res.delta_bands.labels, res.delta_band_props[i]):
                    f.write(f"{env},{_fmt(c)},{i},delta,\"{label}\",{_fmt(p)}\n")
                for label, p in zip(res.l_bands.labels, res.l_band_props[i]):
                    f.write(f"{env},{_fmt(c)},{i},L,\"{label}\",{_fmt(p)}\n")
    with open(out / "objectives.csv", "w") as f:
        f.write("env,baseline_c,objective_kind,gamma_q,estimate,stderr\n")
        for c, res in results.items():
            for spec, (est, se) in res.objective_estimates.items():
                f.write(f"{env},{_fmt(c)},{spec.kind},{_fmt(spec.gamma_q)},{_fmt(est)},{_fmt(se)}\n")
            for spec, est in res.entropy_estimates.items():
                f.write(f"{env},{_fmt(c)},{spec.kind},{_fmt(spec.gamma_q)},{_fmt(est.estimate)},\n")


def config_to_dict(config: ExperimentConfig) -> dict:
    d = dataclasses.asdict(config)
    d["agent"] = dataclasses.asdict(config.agent)
    d["objectives"] = [dataclasses.asdict(s) for s in config.objectives]
    d["delta_bands"] = {"edges": list(config.delta_bands.edges), "le_count": config.delta_bands.le_count}
    d["l_bands"] = {"edges": list(config.l_bands.edges), "le_count": config.l_bands.le_count}
    if d.get("episode_window"):
        d["episode_window"] = list(d["episode_window"])
    return d


# ---------------------------------------------------------------------------
# Config files (TOML)


def load_config(path) -> ExperimentConfig:
    """Parse a declarative TOML experiment file.

    Sections: [experiment] (environment, trials, i_max, master_seed,
    baseline_values, output_dir, threads, episode_window), [agent]
    (hyperparameters; "lambda" maps to lam), [aei] (kind, parameters,
    apply_inverter), repeated [[objectives]] tables, and optional [bins]
    (delta_edges/l_edges with *_le_count).
    """
    try:
        import tomllib  # Python 3.11+
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    try:
        exp = dict(raw.get("experiment", {}))
        environment = exp.pop("environment")
    except KeyError:
        raise ConfigError("missing [experiment] environment") from None
    agent_raw = dict(raw.get("agent", {}))
    if "lambda" in agent_raw:
        agent_raw["lam"] = agent_raw.pop("lambda")
    defaults = default_agent_config(environment)
    try:
        agent = replace(defaults, **agent_raw)
    except TypeError as exc:
        raise ConfigError(f"bad [agent] field: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"bad [agent] value: {exc}") from None

    aei_raw = dict(raw.get("aei", {}))
    aei_kind = aei_raw.pop("kind", "identity")
    apply_inverter = bool(aei_raw.pop("apply_inverter", False))

    objectives = []
    for entry in raw.get("objectives", [{"kind": "performance"}]):
        try:
            objectives.append(ObjectiveSpec(**entry))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad objective: {exc}") from None

    bins = raw.get("bins", {})
    delta_bands = DELTA_BANDS
    l_bands = L_BANDS
    if "delta_edges" in bins:
        delta_bands = BandSpec(tuple(bins["delta_edges"]), int(bins.get("delta_le_count", 4)))
    if "l_edges" in bins:
        l_bands = BandSpec(tuple(bins["l_edges"]), int(bins.get("l_le_count", 4)))

    window = exp.pop("episode_window", None)
    known = {"i_max", "trials", "master_seed", "baseline_values", "output_dir", "threads"}
    unknown = set(exp) - known
    if unknown:
        raise ConfigError(f"unknown [experiment] fields: {sorted(unknown)}")
    try:
        return ExperimentConfig(
            environment=environment,
            agent=agent,
            baseline_values=tuple(exp.get("baseline_values", (0.0,))),
            i_max=int(exp.get("i_max", 500)),
            trials=int(exp.get("trials", 10_000)),
            master_seed=int(exp.get("master_seed", 0)),
            aei_kind=aei_kind,
            aei_params=aei_raw,
            apply_inverter=apply_inverter,
            delta_bands=delta_bands,
            l_bands=l_bands,
            objectives=tuple(objectives),
            episode_window=tuple(window) if window else None,
            output_dir=exp.get("output_dir"),
            threads=exp.get("threads"),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
