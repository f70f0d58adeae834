"""Batched planar rigid-body simulation with compliant contact."""

from .dynamics import (
    RetryBudgetError,
    RolloutTrace,
    SimulationDivergence,
    control_jacobian,
    is_penetrating,
    min_gap,
    proximity,
    proximity_jacobian,
    rollout_batch,
    rollout_segment,
    sample_feasible_state,
    substep,
    substep_batch,
)
from .env import EnvModel, STATE_ORDER, env_from_text, env_to_text, parse_kv_text
from .tasks import TASK_NAMES, make_env

__all__ = [
    "EnvModel",
    "STATE_ORDER",
    "RetryBudgetError",
    "RolloutTrace",
    "SimulationDivergence",
    "TASK_NAMES",
    "control_jacobian",
    "env_from_text",
    "env_to_text",
    "is_penetrating",
    "make_env",
    "min_gap",
    "parse_kv_text",
    "proximity",
    "proximity_jacobian",
    "rollout_batch",
    "rollout_segment",
    "sample_feasible_state",
    "substep",
    "substep_batch",
]
