"""Desk-scale experiment presets sized for minutes, not hours.

Planner presets target the qualitative search-progress results; training
presets target the demonstration-bootstrapping contrast. Paper-scale
values (full epoch counts and horizons) stay in the component defaults;
these presets only shrink budgets so each run finishes quickly on one
core.
"""

from __future__ import annotations

import dataclasses

from .config import ConfigError, ExperimentConfig

# box_push_2d needs many short goal phases at desk scale: refinement near
# the task goal depends on frequent goal redraws, not on deeper trees.
PLAN_DESK = {
    "box_push_1d": {
        "max_nodes": 1000,
        "stop_progress": 0.95,
        "planner": {},
    },
    "box_push_2d": {
        "max_nodes": 3000,
        "stop_progress": 0.95,
        "planner": {"n_goals": 100, "iters_per_goal": 10},
    },
    "planar_hand": {
        "max_nodes": 10000,
        "stop_progress": 0.85,
        "planner": {},
    },
}

TRAIN_DESK = {
    "box_push_1d": {
        "demo_trees": 5,
        "demo_max_nodes": 600,
        "demo_stop_progress": 0.95,
        "learner": {"n_epochs": 15, "n_cycles": 20, "n_steps": 40,
                    "goal_bias": 0.0, "demo_mode": "fixed_ratio",
                    "demo_ratio": 0.25},
    },
    "box_push_2d": {
        "demo_trees": 5,
        "demo_max_nodes": 1200,
        "demo_stop_progress": 0.9,
        "planner": {"n_goals": 100, "iters_per_goal": 10},
        "learner": {"n_epochs": 40, "n_cycles": 20, "n_steps": 50,
                    "goal_bias": 1.0, "demo_mode": "fixed_ratio",
                    "demo_ratio": 0.25},
    },
    "planar_hand": {
        "demo_trees": 5,
        "demo_max_nodes": 4000,
        "demo_stop_progress": 0.8,
        "learner": {"n_epochs": 40, "n_cycles": 20, "n_steps": 60,
                    "goal_bias": 1.0, "demo_mode": "fixed_ratio",
                    "demo_ratio": 0.25},
    },
}


def desk_preset(task: str, mode: str) -> ExperimentConfig:
    """Experiment config preloaded with the task's desk-scale budgets.

    Sweeps layer both tables: a cell runs either a plan or a train and picks
    up its budgets from the matching half, ignoring the other's keys.
    """
    if mode == "sweep":
        tables = (PLAN_DESK, TRAIN_DESK)
    elif mode == "plan":
        tables = (PLAN_DESK,)
    else:
        tables = (TRAIN_DESK,)
    if any(task not in table for table in tables):
        raise ConfigError(f"no desk preset for task {task!r}")
    cfg = ExperimentConfig(task=task, mode=mode)
    for table in tables:
        for key, value in table[task].items():
            if key in ("planner", "learner"):
                getattr(cfg, key).update(value)
            else:
                setattr(cfg, key, value)
    return cfg


def apply_preset(cfg: ExperimentConfig) -> ExperimentConfig:
    """Layer cfg's explicit settings over the task's desk preset."""
    base = desk_preset(cfg.task, cfg.mode)
    merged = dataclasses.replace(
        base, mode=cfg.mode, seeds=list(cfg.seeds), out=cfg.out,
        sweep_param=cfg.sweep_param, sweep_values=list(cfg.sweep_values),
        sweep_metric=cfg.sweep_metric, early_stop=cfg.early_stop)
    merged.planner.update(cfg.planner)
    merged.learner.update(cfg.learner)
    return merged
