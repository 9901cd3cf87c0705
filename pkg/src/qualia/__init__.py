"""Tabular actor-critic simulation library with interface transforms,
objective estimators, representation-robustness checks, and a
reproducible experiment harness."""

__version__ = "0.1.0"

from .process import (
    TERMINAL,
    DEFAULT_HORIZON,
    ContractViolationError,
    HorizonExceededError,
    Perception,
    StepRecord,
    EpisodeIndex,
    Trace,
    run_aerp,
    run_aierp,
    episode_bounds,
    dur,
    discounted_return_episode,
    discounted_return_from,
    dump_trace_csv,
)
from .environments import EnvironmentModel, gridworld, chain, single_state, optimal_return_oracle
from .agents import (
    BacConfig,
    BacMemory,
    BacAgent,
    bac_step,
    softmax_prob,
    action_probabilities,
    compatible_features,
    likelihood_ratio,
    frozen_uniform_agent,
)
from .interfaces import (
    AeiModel,
    AeiInverter,
    identity_aei,
    identity_inverter,
    reward_bonus_aei,
    aligning_aei,
    constant_aei,
    wrap_inverse,
)
from .rng import UniformStream, philox_key, trial_key
from .metrics import (
    ObjectiveSpec,
    BandSpec,
    DELTA_BANDS,
    L_BANDS,
    AggregateResult,
    episode_statistics,
    performance_objective,
    reward_qualia,
    tde_qualia,
    reinforcement_qualia,
    entropy_qualia,
)
from .robustness import (
    RepresentationMap,
    shannon_entropy,
    mutual_information,
    kl_divergence,
    differential_entropy_uniform,
    check_invariance,
    exploitability_demo,
    reencode_trace,
    recompute_likelihood_ratios,
)
from .harness import (
    ExperimentConfig,
    default_agent_config,
    load_config,
    run_experiment,
)
