"""Seeded experiment runner, sweeps, plotting, and the command line."""

from .config import (ConfigError, ExperimentConfig, parse_config,
                     serialize_config, set_key)
from .plot import emit_bar_plot, emit_plot
from .presets import PLAN_DESK, TRAIN_DESK, apply_preset, desk_preset
from .report import report
from .runner import (build_planner_params, build_train_config,
                     progress_series, run, sweep)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PLAN_DESK",
    "TRAIN_DESK",
    "apply_preset",
    "build_planner_params",
    "build_train_config",
    "desk_preset",
    "emit_bar_plot",
    "emit_plot",
    "parse_config",
    "progress_series",
    "report",
    "run",
    "serialize_config",
    "set_key",
    "sweep",
]
