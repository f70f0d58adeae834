"""Command line entry point.

Subcommands pick the mode; a config file is optional and starts from the
task's desk preset when absent. Exit codes: 0 success, 1 when some seeds
failed, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import (ConfigError, ExperimentConfig, parse_config,
                     serialize_config, set_key)
from .presets import desk_preset
from .runner import run, sweep
from .report import report


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planrl",
        description="Seeded planning and learning experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("plan", "grow a search tree per seed"),
                       ("train", "train a policy per seed"),
                       ("sweep", "grid over one parameter"),
                       ("report", "re-aggregate an artifact directory")):
        cmd = sub.add_parser(name, help=text)
        if name == "report":
            cmd.add_argument("dir", help="existing artifact directory")
            continue
        cmd.add_argument("--config", type=Path, default=None,
                         help="config file; defaults to the task preset")
        cmd.add_argument("--task", default=None,
                         help="task name when no config file names one")
        cmd.add_argument("--seeds", default=None,
                         help="comma separated seed list, e.g. 0,1,2")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--force", action="store_true",
                         help="allow writing into a non-empty directory")
        cmd.add_argument("--set", action="append", default=[],
                         metavar="KEY=VALUE", dest="overrides",
                         help="dotted config override, repeatable")
    return parser


def _load_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = parse_config(Path(args.config).read_text())
        if args.task:
            cfg.task = args.task
    else:
        task = args.task or "box_push_1d"
        cfg = desk_preset(task, args.command)
    cfg.mode = args.command
    if args.seeds:
        try:
            cfg.seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --seeds value {args.seeds!r}") from exc
    if args.out:
        cfg.out = args.out
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, rest = item.partition("=")
        from .config import _parse_value
        set_key(cfg, key.strip(), _parse_value(rest, 0))
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "report":
            report(Path(args.dir))
            return 0
        cfg = _load_config(args)
        runner = sweep if args.command == "sweep" else run
        out, results = runner(cfg, force=args.force)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"artifacts in {out}")
    flat = _flatten(results)
    failed = [name for name, res in flat if "error" in res]
    for name, res in flat:
        line = ", ".join(f"{k}={_short(v)}" for k, v in res.items())
        print(f"  {name}: {line}")
    if failed and len(failed) == len(flat):
        print("all seeds failed", file=sys.stderr)
        return 1
    return 1 if failed else 0


def _flatten(results: dict) -> list:
    out = []
    for key, value in results.items():
        if value and all(isinstance(v, dict) for v in value.values()):
            out.extend((f"{key}/seed {s}", r) for s, r in value.items())
        else:
            out.append((f"seed {key}", value))
    return out


def _short(value) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


if __name__ == "__main__":
    sys.exit(main())
