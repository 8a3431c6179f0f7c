"""Simulation library for linear contextual bandits with group structure.

The package provides the instance generators (two-bridge routing and
perturbed-context populations), the policies under study (LinUCB and the
batched greedy family), estimator and regret bookkeeping, the reward
simulation construction used to audit batched data, and a seeded
experiment harness with a CSV-emitting CLI.
"""

from .config import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    defaults_table,
    parse_config,
)
from .core import (
    ConfigurationError,
    ContextRound,
    EmptyBatchError,
    Group,
    History,
    LatentModel,
    ModelError,
    NoiseKind,
    RoundKind,
    as_context,
    batch_slice,
    last_batch_end,
)
from .csvio import ResultRow, emit_csv, parse_csv
from .environments import (
    BOTTOM,
    TOP,
    CatalogEntry,
    PerturbedConfig,
    TwoBridgeConfig,
    draw_theta,
    realize_reward,
    sample_perturbed_round,
    sample_two_bridge_round,
)
from .estimators import (
    SufficientStats,
    bayes_posterior_mean,
    estimate_error,
    min_eigenvalue,
    ols_estimate,
    update_stats,
)
from .metrics import (
    RegretLedger,
    Restriction,
    bayesian_regret,
    cumulative_regret,
    gap,
    instantaneous_regret,
    prediction_regret,
    scaling_exponent,
)
from .policies import (
    BatchBayesGreedyPolicy,
    BatchFreqGreedyPolicy,
    LinUCBParams,
    LinUCBPolicy,
    OraclePolicy,
    UniformRandomPolicy,
    greedy_select,
    interval_width,
    linucb_scores,
    linucb_select,
    make_policy,
    policy_step,
    suggested_batch_size,
)
from .experiments import (
    ExperimentResult,
    ReplicateError,
    build_instance,
    experiment_curves,
    run_experiment,
    simulation_verification_report,
)
from .rng import Purpose, replicate_seed_id, stream
from .simulation import (
    InsufficientDiversityError,
    RadiusError,
    SimulationWeights,
    simulate_reward,
    simulate_reward_many,
    simulation_weights,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
