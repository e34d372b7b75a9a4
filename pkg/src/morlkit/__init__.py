"""Multi-objective RL toolkit: coverage-set solving over value vectors,
a one-actor/multi-critic clipped policy-gradient engine with a learned
inter-objective relationship matrix, and contrastive trade-off
explanations."""

from .core import (
    Iorm,
    MomdpSpec,
    TrajectoryBatch,
    ValueVector,
    WeightVector,
    discounted_return,
    empirical_value_estimate,
    proxy_values,
    scalarize,
)
from .ccs import (
    AolsResult,
    PartialCcs,
    aols,
    corner_weights,
    is_convex_undominated,
    optimistic_bound,
    relative_improvement,
    scalarized_max,
)
from .training import (
    CriticBank,
    TrainerConfig,
    evaluate_policy,
    train,
    train_single_objective,
)

__all__ = [
    "AolsResult",
    "CriticBank",
    "Iorm",
    "MomdpSpec",
    "PartialCcs",
    "TrainerConfig",
    "TrajectoryBatch",
    "ValueVector",
    "WeightVector",
    "aols",
    "corner_weights",
    "discounted_return",
    "empirical_value_estimate",
    "evaluate_policy",
    "is_convex_undominated",
    "optimistic_bound",
    "proxy_values",
    "relative_improvement",
    "scalarize",
    "scalarized_max",
    "train",
    "train_single_objective",
]
