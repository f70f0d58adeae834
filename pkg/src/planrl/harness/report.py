"""Re-aggregation of an existing artifact directory."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .config import ConfigError, parse_config


def report(path: Path) -> None:
    """Rebuild aggregate plots from stored CSVs and print the summary."""
    manifest_path = Path(path) / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError(f"{path} has no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    cfg = parse_config(manifest["config"])
    print(f"task {cfg.task}, mode {cfg.mode}, seeds {cfg.seeds}, "
          f"version {manifest.get('version')}")
    sweep_csv = Path(path) / "sweep.csv"
    if sweep_csv.exists():
        from .plot import emit_bar_plot
        with open(sweep_csv, newline="") as fh:
            rows = list(csv.DictReader(fh))
        emit_bar_plot([r["value"] for r in rows],
                      [float(r["mean"]) for r in rows],
                      [float(r["std"]) for r in rows],
                      Path(path) / "sweep.svg",
                      title=f"{cfg.task}: {cfg.sweep_param}",
                      x_label=cfg.sweep_param, y_label=cfg.sweep_metric)
        for r in rows:
            print(f"  {r['value']}: {float(r['mean']):.4g} "
                  f"+- {float(r['std']):.4g} "
                  f"({r['ok_seeds']}/{r['total_seeds']} seeds)")
        return
    from .runner import _aggregate_plots
    _aggregate_plots(cfg, Path(path), manifest["results"])
    for seed, res in manifest["results"].items():
        line = ", ".join(f"{k}={v}" for k, v in res.items())
        print(f"  seed {seed}: {line}")
