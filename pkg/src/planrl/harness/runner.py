"""Seeded experiment execution: per-seed artifacts, aggregation, sweeps.

Every run directory contains a config snapshot, per-seed subdirectories
with CSV metrics and exported trees or checkpoints, a manifest, and an
aggregate SVG. Identical config and seeds reproduce byte-identical CSVs.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import time
from pathlib import Path

import numpy as np

from .. import __version__
from ..learner import (build_demo_set, default_train_config, evaluate,
                       make_agent, pretrain, train)
from ..nets import save_checkpoint
from ..planner import default_params, plan, weighted_norm
from ..sim_core import make_env
from .config import ConfigError, ExperimentConfig, serialize_config, set_key
from .plot import emit_bar_plot, emit_plot

TRAIN_CSV_COLUMNS = ("epoch", "env_steps", "success_rate",
                     "mean_episode_reward", "demo_fraction", "critic_loss",
                     "actor_objective")
PLAN_CSV_COLUMNS = ("node", "progress")


def build_planner_params(env, overrides: dict):
    params = default_params(env)
    if overrides:
        fields = {f.name for f in dataclasses.fields(params)}
        clean = {}
        for key, value in overrides.items():
            if key not in fields:
                raise ConfigError(f"unknown planner key {key!r}")
            current = getattr(params, key)
            if isinstance(current, np.ndarray):
                value = np.asarray(value, dtype=float)
            clean[key] = value
        params = dataclasses.replace(params, **clean)
    params.validate()
    return params


def build_train_config(env, overrides: dict):
    return default_train_config(env, **overrides)


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def prepare_out_dir(cfg: ExperimentConfig, force: bool = False) -> Path:
    out = Path(cfg.out)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise ConfigError(f"output directory {out} is not empty; "
                              "pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _manifest(out: Path, cfg: ExperimentConfig, results: dict) -> None:
    text = serialize_config(cfg)
    digest = hashlib.sha256(
        (text + __version__).encode()).hexdigest()
    payload = {
        "config": text,
        "seeds": list(cfg.seeds),
        "version": __version__,
        "content_hash": digest,
        "results": results,
    }
    (out / "manifest.json").write_text(json.dumps(payload, indent=2,
                                                  sort_keys=True) + "\n")
    (out / "config.txt").write_text(text)


def progress_series(tree, env, task_goal, dist_weights) -> np.ndarray:
    """Search progress after each node, recomputed against the task goal."""
    d = weighted_norm(tree.states[:len(tree)] - task_goal, dist_weights)
    d0 = d[0]
    if d0 == 0.0:
        return np.ones(len(tree))
    best = np.minimum.accumulate(d)
    return 1.0 - best / d0


def _plan_seed(cfg: ExperimentConfig, seed: int, seed_dir: Path) -> dict:
    env = make_env(cfg.task)
    params = build_planner_params(env, cfg.planner)
    rng = np.random.default_rng(seed)
    t0 = time.time()
    tree = plan(env, env.start_state, env.task_goal, params, rng,
                max_nodes=cfg.max_nodes, stop_progress=cfg.stop_progress)
    wall = time.time() - t0
    series = progress_series(tree, env, env.task_goal, params.dist_weights)
    rows = [(i + 1, float(p)) for i, p in enumerate(series)]
    _write_csv(seed_dir / "progress.csv", PLAN_CSV_COLUMNS, rows)
    (seed_dir / "tree.txt").write_text(tree.to_text())
    return {
        "nodes": len(tree),
        "final_progress": float(series[-1]),
        "average_progress": float(series.mean()),
        "extend_failures": int(tree.extend_failures),
        "wall_seconds": wall,
    }


def _train_seed(cfg: ExperimentConfig, seed: int, seed_dir: Path) -> dict:
    env = make_env(cfg.task)
    train_cfg = build_train_config(env, cfg.learner)
    demo_rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    demo_set = None
    if train_cfg.demo_mode != "none" or train_cfg.pretrain_policy \
            or train_cfg.pretrain_value:
        params = build_planner_params(env, cfg.planner)
        demo_set = build_demo_set(env, params, cfg.demo_trees, demo_rng,
                                  max_nodes=cfg.demo_max_nodes,
                                  stop_progress=cfg.demo_stop_progress)
    t0 = time.time()
    agent, metrics = train(env, demo_set, train_cfg, seed,
                           max_env_steps=cfg.max_env_steps,
                           wall_clock_cap=cfg.wall_clock_cap,
                           early_stop=cfg.early_stop)
    wall = time.time() - t0
    rows = [tuple(m[c] for c in TRAIN_CSV_COLUMNS) for m in metrics]
    _write_csv(seed_dir / "metrics.csv", TRAIN_CSV_COLUMNS, rows)
    nets = {"actor": agent.actor, "critic": agent.critic,
            "normalizer": agent.norm}
    if agent.imitation_actor is not None:
        nets["imitation_actor"] = agent.imitation_actor
    save_checkpoint(seed_dir / "checkpoint.bin", nets)
    success = [m["success_rate"] for m in metrics]
    return {
        "epochs": len(metrics),
        "env_steps": metrics[-1]["env_steps"] if metrics else 0,
        "final_success": success[-1] if success else 0.0,
        "best_success": max(success) if success else 0.0,
        "average_success": float(np.mean(success)) if success else 0.0,
        "wall_seconds": wall,
    }


def _pretrain_eval_seed(cfg: ExperimentConfig, seed: int,
                        seed_dir: Path) -> dict:
    env = make_env(cfg.task)
    overrides = dict(cfg.learner)
    overrides.setdefault("pretrain_policy", True)
    train_cfg = build_train_config(env, overrides)
    params = build_planner_params(env, cfg.planner)
    seq = np.random.SeedSequence(seed)
    net_seed, run_seed = seq.spawn(2)
    rng = np.random.default_rng(run_seed)
    demo_set = build_demo_set(env, params, cfg.demo_trees,
                              np.random.default_rng(
                                  np.random.SeedSequence([seed, 1])),
                              max_nodes=cfg.demo_max_nodes,
                              stop_progress=cfg.demo_stop_progress)
    agent = make_agent(env, train_cfg, net_seed)
    pretrain(env, demo_set, agent, train_cfg, rng)
    agent.actor = agent.imitation_actor
    success = evaluate(env, agent, train_cfg, rng)
    _write_csv(seed_dir / "metrics.csv", ("seed", "success_rate"),
               [(seed, success)])
    save_checkpoint(seed_dir / "checkpoint.bin",
                    {"imitation_actor": agent.imitation_actor,
                     "critic": agent.critic, "normalizer": agent.norm})
    return {"success_rate": success}


_SEED_RUNNERS = {
    "plan": _plan_seed,
    "train": _train_seed,
    "pretrain-eval": _pretrain_eval_seed,
}


def run(cfg: ExperimentConfig, force: bool = False) -> tuple:
    """Execute one experiment; returns (out dir, per-seed results dict).

    A seed failure is recorded and the remaining seeds still run; the
    caller decides the exit status from the results.
    """
    cfg.validate()
    if cfg.mode == "sweep":
        return sweep(cfg, force=force)
    out = prepare_out_dir(cfg, force)
    results = {}
    for seed in cfg.seeds:
        seed_dir = out / f"seed_{seed}"
        seed_dir.mkdir(exist_ok=True)
        try:
            results[str(seed)] = _SEED_RUNNERS[cfg.mode](cfg, seed, seed_dir)
        except Exception as exc:  # noqa: BLE001 - seed isolation boundary
            results[str(seed)] = {"error": f"{type(exc).__name__}: {exc}"}
    _aggregate_plots(cfg, out, results)
    _manifest(out, cfg, results)
    return out, results


def _aggregate_plots(cfg: ExperimentConfig, out: Path, results: dict) -> None:
    good = [s for s in cfg.seeds if "error" not in results[str(s)]]
    if not good:
        return
    if cfg.mode == "plan":
        runs = []
        for seed in good:
            series = _read_csv_column(out / f"seed_{seed}" / "progress.csv",
                                      "progress")
            runs.append(series)
        n = max(len(r) for r in runs)
        padded = [np.concatenate([r, np.full(n - len(r), r[-1])])
                  for r in runs]
        emit_plot([{"label": cfg.task, "x": np.arange(1, n + 1),
                    "runs": padded}],
                  out / "progress.svg", title=f"{cfg.task} search progress",
                  x_label="nodes", y_label="progress")
    elif cfg.mode == "train":
        runs, steps = [], []
        for seed in good:
            path = out / f"seed_{seed}" / "metrics.csv"
            runs.append(_read_csv_column(path, "success_rate"))
            steps.append(_read_csv_column(path, "env_steps"))
        if not any(len(r) for r in runs):
            return
        n = max(len(r) for r in runs)
        padded = [np.concatenate([r, np.full(n - len(r),
                                             r[-1] if len(r) else 0.0)])
                  for r in runs]
        x = max(steps, key=len)
        emit_plot([{"label": cfg.task, "x": x, "runs": padded}],
                  out / "success.svg", title=f"{cfg.task} training",
                  x_label="env steps", y_label="success rate")


def _read_csv_column(path: Path, column: str) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return np.array([float(row[column]) for row in reader])


def _cell_metric(cfg: ExperimentConfig, seed_result: dict) -> float:
    key = cfg.sweep_metric
    if key not in seed_result:
        raise ConfigError(f"metric {key!r} not produced by mode {cfg.mode!r}")
    return float(seed_result[key])


def sweep(cfg: ExperimentConfig, force: bool = False) -> tuple:
    """Grid over one parameter; one mean +- std row per value."""
    cfg.validate()
    out = prepare_out_dir(cfg, force)
    base_mode = "plan" if cfg.sweep_metric == "average_progress" else "train"
    table = []
    all_results = {}
    for value in cfg.sweep_values:
        cell = dataclasses.replace(
            cfg, mode=base_mode, planner=dict(cfg.planner),
            learner=dict(cfg.learner), seeds=list(cfg.seeds),
            sweep_values=[],
            out=str(out / f"cell_{_slug(value)}"))
        if base_mode == "train":
            # fixed horizon keeps the averaged metric comparable per cell
            cell.early_stop = False
        set_key(cell, cfg.sweep_param, value)
        cell_out, results = run(cell, force=force)
        all_results[str(value)] = results
        scores = []
        for seed in cfg.seeds:
            res = results[str(seed)]
            if "error" in res:
                scores.append(np.nan)
            else:
                scores.append(_cell_metric(cfg, res))
        scores = np.asarray(scores, dtype=float)
        ok = np.isfinite(scores)
        table.append((value,
                      float(scores[ok].mean()) if ok.any() else float("nan"),
                      float(scores[ok].std()) if ok.any() else float("nan"),
                      int(ok.sum()), len(scores)))
    rows = [(str(v), m, s, k, n) for v, m, s, k, n in table]
    _write_csv(out / "sweep.csv",
               ("value", "mean", "std", "ok_seeds", "total_seeds"), rows)
    emit_bar_plot([r[0] for r in table], [r[1] for r in table],
                  [r[2] for r in table], out / "sweep.svg",
                  title=f"{cfg.task}: {cfg.sweep_param}",
                  x_label=cfg.sweep_param, y_label=cfg.sweep_metric)
    _manifest(out, cfg, all_results)
    return out, all_results


def _slug(value) -> str:
    text = str(value).replace(" ", "")
    return "".join(c if c.isalnum() or c in ".-" else "_" for c in text)
