"""Training configuration and per-task defaults."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..planner import default_params
from ..sim_core import EnvModel

DEMO_MODES = ("none", "fixed_ratio", "decaying", "initial_only")


@dataclass
class TrainConfig:
    n_epochs: int
    n_steps: int                    # rollout horizon
    n_cycles: int = 50
    n_rollouts: int = 2
    n_episode: int = 40             # optimizer updates per cycle
    n_batch: int = 256
    gamma: float = 0.98
    tau: float = 0.05
    eta: float = 0.3                # uniform random action chance
    noise_sigma: float = 0.1        # Gaussian action noise, action half-range
    lr: float = 1e-3
    action_l2: float = 1.0          # actor magnitude penalty weight
    epsilon: float = 0.2            # success ratio threshold
    goal_bias: float = 0.0          # chance of drawing the task goal
    demo_mode: str = "none"
    demo_ratio: float = 0.25        # b_p
    her_prob: float = 0.0           # per-transition relabel chance, 0 = off
    eval_runs: int = 10
    buffer_episodes: int = 10000
    hidden_width: int = 64          # 256 reproduces the reference scale
    hidden_layers: int = 4
    policy_final_scale: float = 1e-2
    pretrain_policy: bool = False
    pretrain_value: bool = False
    pretrain_updates: int = 2000
    dual_policy: bool = False
    dist_weights: np.ndarray = None     # reward metric, from the planner
    alpha_max: np.ndarray = None        # action scale, from the planner

    def validate(self) -> None:
        for name in ("gamma", "tau", "eta", "epsilon", "demo_ratio",
                     "her_prob", "goal_bias"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1]")
        if self.gamma >= 1.0:
            raise ValueError("gamma must be < 1 for a finite value bound")
        for name in ("n_epochs",):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("n_steps", "n_cycles", "n_rollouts", "n_episode",
                     "n_batch", "eval_runs", "buffer_episodes",
                     "hidden_width", "hidden_layers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.demo_mode not in DEMO_MODES:
            raise ValueError(f"demo_mode must be one of {DEMO_MODES}")
        if self.noise_sigma < 0 or self.lr <= 0:
            raise ValueError("noise_sigma must be >= 0 and lr > 0")
        if self.action_l2 < 0:
            raise ValueError("action_l2 must be nonnegative")
        if self.dist_weights is None or self.alpha_max is None:
            raise ValueError("dist_weights and alpha_max are required")


_TASK_TRAIN = {
    "box_push_1d": dict(n_epochs=150, n_steps=75),
    "box_push_2d": dict(n_epochs=150, n_steps=100),
    "planar_hand": dict(n_epochs=150, n_steps=80),
}


def default_train_config(env: EnvModel, **overrides) -> TrainConfig:
    """Reference-scale training configuration for a bundled task."""
    row = _TASK_TRAIN[env.name]
    pp = default_params(env)
    cfg = TrainConfig(n_epochs=row["n_epochs"], n_steps=row["n_steps"],
                      dist_weights=pp.dist_weights,
                      alpha_max=pp.alpha_max)
    for key, value in overrides.items():
        if not hasattr(cfg, key):
            raise ValueError(f"unknown TrainConfig field {key!r}")
        setattr(cfg, key, value)
    cfg.validate()
    return cfg
