"""Experiment configuration: a strict line-oriented key=value schema.

Top-level keys configure the run (task, mode, seeds, budgets, output).
Dotted keys override component parameters: ``planner.horizon = 8`` and
``learner.n_epochs = 20`` map onto the planner parameter and training
configuration fields. Unknown keys are rejected with their line number.
"""

from __future__ import annotations

import ast
import dataclasses
from dataclasses import dataclass, field

from ..learner import TrainConfig
from ..planner import PlannerParams
from ..sim_core import TASK_NAMES

MODES = ("plan", "train", "sweep", "pretrain-eval")
SWEEP_METRICS = ("average_progress", "average_success")

_PLANNER_KEYS = {f.name for f in dataclasses.fields(PlannerParams)}
_LEARNER_KEYS = {f.name for f in dataclasses.fields(TrainConfig)}


class ConfigError(ValueError):
    """Raised for unknown keys, type mismatches, or constraint violations."""


@dataclass
class ExperimentConfig:
    task: str = "box_push_1d"
    mode: str = "plan"
    seeds: list = field(default_factory=lambda: [0])
    out: str = "runs/latest"
    # planner budgets
    max_nodes: int = 1000
    stop_progress: float | None = None
    # learner budgets
    max_env_steps: int | None = None
    wall_clock_cap: float | None = None
    early_stop: bool = True
    # demonstration generation for train mode
    demo_trees: int = 5
    demo_max_nodes: int = 1000
    demo_stop_progress: float = 0.9
    # sweep definition
    sweep_param: str = ""
    sweep_values: list = field(default_factory=list)
    sweep_metric: str = "average_progress"
    # component overrides, keyed by field name
    planner: dict = field(default_factory=dict)
    learner: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.task not in TASK_NAMES:
            raise ConfigError(f"unknown task {self.task!r}, expected one of "
                              f"{sorted(TASK_NAMES)}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if any((not isinstance(s, int)) or s < 0 for s in self.seeds):
            raise ConfigError("seeds must be nonnegative integers")
        for name in ("max_nodes", "demo_trees", "demo_max_nodes"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("max_env_steps", "wall_clock_cap"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("stop_progress", "demo_stop_progress"):
            value = getattr(self, name)
            if value is not None and not 0.0 < value <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1]")
        if self.sweep_metric not in SWEEP_METRICS:
            raise ConfigError(f"unknown sweep_metric {self.sweep_metric!r}")
        if self.mode == "sweep":
            if not self.sweep_param:
                raise ConfigError("sweep mode needs sweep_param")
            if not self.sweep_values:
                raise ConfigError("sweep mode needs a nonempty sweep_values")
            _check_override_key(self.sweep_param, "sweep_param")
        for key in self.planner:
            if key not in _PLANNER_KEYS:
                raise ConfigError(f"unknown planner key {key!r}")
        for key in self.learner:
            if key not in _LEARNER_KEYS:
                raise ConfigError(f"unknown learner key {key!r}")


_TOP_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)
               if f.name not in ("planner", "learner")}


def _check_override_key(path: str, where: str) -> None:
    scope, _, name = path.partition(".")
    if scope == "planner" and name in _PLANNER_KEYS:
        return
    if scope == "learner" and name in _LEARNER_KEYS:
        return
    if path in _TOP_FIELDS:
        return
    raise ConfigError(f"{where}: unknown parameter path {path!r}")


def _parse_value(text: str, line_no: int):
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        pass
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null"):
        return None
    if "," in text:
        return [_parse_value(part, line_no) for part in text.split(",")]
    return text


def set_key(cfg: ExperimentConfig, path: str, value, line_no: int = 0) -> None:
    """Assign one possibly dotted key, with type coercion and checks."""
    where = f"line {line_no}" if line_no else "override"
    scope, _, name = path.partition(".")
    if scope in ("planner", "learner") and name:
        table = _PLANNER_KEYS if scope == "planner" else _LEARNER_KEYS
        if name not in table:
            raise ConfigError(f"{where}: unknown {scope} key {name!r}")
        getattr(cfg, scope)[name] = value
        return
    if path not in _TOP_FIELDS:
        raise ConfigError(f"{where}: unknown key {path!r}")
    current = getattr(cfg, path)
    if path == "seeds":
        if isinstance(value, int):
            value = [value]
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: seeds expects a list")
        value = list(value)
    elif path == "sweep_values":
        if not isinstance(value, (list, tuple)):
            value = [value]
        value = list(value)
    elif isinstance(current, bool) and not isinstance(value, bool):
        raise ConfigError(f"{where}: {path} expects a boolean")
    elif isinstance(current, int) and not isinstance(value, bool):
        if isinstance(value, float) and value != int(value):
            raise ConfigError(f"{where}: {path} expects an integer")
        if not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: {path} expects an integer")
        value = int(value)
    elif isinstance(current, float) and isinstance(value, int):
        value = float(value)
    elif isinstance(current, str) and not isinstance(value, str):
        raise ConfigError(f"{where}: {path} expects a string")
    setattr(cfg, path, value)


def parse_config(text: str) -> ExperimentConfig:
    """Parse the key=value schema; errors carry the offending line."""
    cfg = ExperimentConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key = value, got "
                              f"{raw.strip()!r}")
        key, _, rest = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {line_no}: empty key")
        value = _parse_value(rest, line_no)
        set_key(cfg, key, value, line_no)
    cfg.validate()
    return cfg


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if isinstance(value, str):
        return value
    return repr(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Deterministic text form; parse(serialize(cfg)) reproduces cfg."""
    lines = []
    for name in _TOP_FIELDS:
        lines.append(f"{name} = {_format_value(getattr(cfg, name))}")
    for scope in ("planner", "learner"):
        table = getattr(cfg, scope)
        for key in sorted(table):
            lines.append(f"{scope}.{key} = {_format_value(table[key])}")
    return "\n".join(lines) + "\n"
