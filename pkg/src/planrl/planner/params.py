"""Planner parameter set and per-task defaults.

Action method order everywhere: (random, continuation, proximity,
goal_directed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..sim_core import EnvModel

ACTION_METHODS = ("random", "continuation", "proximity", "goal_directed")


@dataclass
class PlannerParams:
    n_goals: int                    # outer goal loop count
    iters_per_goal: int             # node selections per goal
    goal_bias: float                # probability of drawing the task goal
    beta: float                     # initial Pareto exponent
    beta_min: float
    beta_max: float
    horizon: float                  # initial extension horizon, real-valued
    horizon_max: float
    action_probs: np.ndarray        # (4,) weights over ACTION_METHODS
    alpha_max: np.ndarray           # (n_r,) per-joint magnitude bound
    step_multiple_max: int          # largest action duration multiple
    dist_weights: np.ndarray        # (n_s,) diagonal of the distance metric
    prox_weights: np.ndarray        # (n_p,) diagonal of the proximity metric
    reach_scale: float              # reachability reward scale
    reach_floor: float = 1e-3      # clip m from below at this value
    reach_reg: float = 1e-4        # regularizer inside the reachability metric
    gd_state_weights: np.ndarray = None   # (n_s,) goal-directed state cost
    gd_action_reg: float = 1e-3    # goal-directed action regularizer

    def validate(self) -> None:
        if not (0.0 <= self.goal_bias <= 1.0):
            raise ValueError("goal_bias must be in [0, 1]")
        if not (0 < self.beta_min <= self.beta <= self.beta_max):
            raise ValueError("require 0 < beta_min <= beta <= beta_max")
        if not (1.0 <= self.horizon <= self.horizon_max):
            raise ValueError("require 1 <= horizon <= horizon_max")
        if self.action_probs.shape != (4,) or (self.action_probs < 0).any() \
                or self.action_probs.sum() <= 0:
            raise ValueError("action_probs must be 4 nonnegative weights")
        if self.step_multiple_max < 1:
            raise ValueError("step_multiple_max must be >= 1")
        if (self.dist_weights < 0).any() or (self.prox_weights < 0).any():
            raise ValueError("metric weights must be nonnegative")
        if self.reach_scale < 0:
            raise ValueError("reach_scale must be nonnegative")
        if min(self.reach_floor, self.reach_reg, self.gd_action_reg) <= 0:
            raise ValueError("regularizers must be positive")


# object-configuration distance weights per task; object velocities get 0.1,
# robot states 0
_TASK_TABLE = {
    "box_push_1d": dict(obj_weights=(1.0,), prox=1.0, reach=1.0,
                        probs=(1.0, 1.0, 2.0, 2.0)),
    "box_push_2d": dict(obj_weights=(1.0, 1.0), prox=1e-3, reach=1e-3,
                        probs=(6.0, 2.0, 2.0, 1.0)),
    "planar_hand": dict(obj_weights=(1.0, 1.0, math.pi / 2.0), prox=1e-2,
                        reach=1e-2, probs=(1.0, 1.0, 2.0, 2.0)),
}


def dist_weight_vector(env: EnvModel, obj_weights) -> np.ndarray:
    w = np.zeros(env.n_s)
    w[2 * env.n_r:2 * env.n_r + env.n_o] = obj_weights
    w[2 * env.n_r + env.n_o:] = 0.1
    return w


def default_params(env: EnvModel) -> PlannerParams:
    """Baseline planner configuration for one of the bundled tasks."""
    row = _TASK_TABLE[env.name]
    dist_w = dist_weight_vector(env, row["obj_weights"])
    gd_w = dist_w.copy()
    gd_w[2 * env.n_r + env.n_o:] = 0.0      # position error only
    p = PlannerParams(
        n_goals=30,
        iters_per_goal=30,
        goal_bias=0.0,
        beta=1.2,
        beta_min=0.2,
        beta_max=1.2,
        horizon=5.0,
        horizon_max=10.0,
        action_probs=np.array(row["probs"]),
        alpha_max=env.action_scale.copy(),
        step_multiple_max=3,
        dist_weights=dist_w,
        prox_weights=np.full(env.n_p, row["prox"]),
        reach_scale=row["reach"],
        gd_state_weights=gd_w,
    )
    p.validate()
    return p
