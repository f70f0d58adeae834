"""Harness tests: config grammar, artifact layout, plots, CLI."""

import json
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from planrl.harness import (
    ConfigError,
    ExperimentConfig,
    desk_preset,
    emit_bar_plot,
    emit_plot,
    parse_config,
    run,
    serialize_config,
    set_key,
)
from planrl.harness.cli import main

TINY_LEARNER = {"n_epochs": 1, "n_cycles": 2, "n_steps": 8, "eval_runs": 4}


# ---------------------------------------------------------------- grammar

def test_parse_config_minimal():
    cfg = parse_config("task = box_push_2d\nmode = plan\nseeds = 0, 1\n")
    assert cfg.task == "box_push_2d"
    assert cfg.mode == "plan"
    assert cfg.seeds == [0, 1]


def test_parse_config_comments_and_blanks():
    cfg = parse_config("# header\n\ntask = planar_hand  \n\n# tail\n")
    assert cfg.task == "planar_hand"


def test_parse_config_dotted_overrides():
    cfg = parse_config("planner.n_goals = 12\nlearner.n_epochs = 3\n")
    assert cfg.planner == {"n_goals": 12}
    assert cfg.learner == {"n_epochs": 3}


def test_parse_config_reports_line_numbers():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("task = box_push_1d\nnot a key value pair\n")


def test_parse_config_unknown_keys():
    with pytest.raises(ConfigError, match="unknown key 'walrus'"):
        parse_config("walrus = 3\n")
    with pytest.raises(ConfigError, match="unknown planner key"):
        parse_config("planner.bogus = 1\n")
    with pytest.raises(ConfigError, match="unknown learner key"):
        parse_config("learner.bogus = 1\n")


def test_round_trip_is_idempotent():
    text = ("task = box_push_2d\nmode = train\nseeds = 0, 1, 2\n"
            "demo_trees = 7\nplanner.n_goals = 40\nlearner.gamma = 0.95\n")
    once = serialize_config(parse_config(text))
    twice = serialize_config(parse_config(once))
    assert once == twice
    cfg = parse_config(once)
    assert cfg.task == "box_push_2d"
    assert cfg.seeds == [0, 1, 2]
    assert cfg.planner == {"n_goals": 40}
    assert cfg.learner == {"gamma": 0.95}


def test_set_key_coercions():
    cfg = ExperimentConfig()
    set_key(cfg, "seeds", 5)
    assert cfg.seeds == [5]
    set_key(cfg, "max_nodes", 3.0)
    assert cfg.max_nodes == 3 and isinstance(cfg.max_nodes, int)
    set_key(cfg, "demo_stop_progress", 1)
    assert cfg.demo_stop_progress == 1.0
    with pytest.raises(ConfigError, match="expects an integer"):
        set_key(cfg, "max_nodes", 2.5)
    with pytest.raises(ConfigError, match="expects a boolean"):
        set_key(cfg, "early_stop", 1)
    with pytest.raises(ConfigError, match="expects a string"):
        set_key(cfg, "task", 3)


def test_validate_rejects_bad_fields():
    with pytest.raises(ConfigError, match="unknown task"):
        ExperimentConfig(task="box_push_3d").validate()
    with pytest.raises(ConfigError, match="unknown mode"):
        ExperimentConfig(mode="evolve").validate()
    with pytest.raises(ConfigError, match="seeds"):
        ExperimentConfig(seeds=[]).validate()
    with pytest.raises(ConfigError, match="seeds"):
        ExperimentConfig(seeds=[-1]).validate()
    with pytest.raises(ConfigError, match="sweep_param"):
        ExperimentConfig(mode="sweep", sweep_values=[1]).validate()


def test_desk_presets_shapes():
    plan2d = desk_preset("box_push_2d", "plan")
    assert plan2d.planner["n_goals"] == 100
    train1d = desk_preset("box_push_1d", "train")
    assert train1d.learner["demo_mode"] == "fixed_ratio"
    assert 0.0 < train1d.learner["demo_ratio"] < 1.0


# ---------------------------------------------------------------- plan runs

@pytest.fixture(scope="module")
def plan_run(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("plan")
    cfg = ExperimentConfig(task="box_push_1d", mode="plan", seeds=[0, 1],
                           out=str(out_dir / "a"), max_nodes=40)
    out, results = run(cfg)
    return cfg, out, results


def test_plan_artifact_layout(plan_run):
    _, out, results = plan_run
    for seed in (0, 1):
        assert (out / f"seed_{seed}" / "progress.csv").exists()
        assert (out / f"seed_{seed}" / "tree.txt").exists()
        assert "error" not in results[str(seed)]
        assert results[str(seed)]["nodes"] <= 40
    assert (out / "progress.svg").exists()
    assert (out / "config.txt").exists()


def test_plan_manifest_contents(plan_run):
    cfg, out, results = plan_run
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"] == serialize_config(cfg)
    assert manifest["seeds"] == [0, 1]
    assert len(manifest["content_hash"]) == 64
    for seed in ("0", "1"):
        assert manifest["results"][seed]["nodes"] == results[seed]["nodes"]


def test_plan_progress_csv_monotone(plan_run):
    _, out, _ = plan_run
    rows = (out / "seed_0" / "progress.csv").read_text().splitlines()
    assert rows[0] == "node,progress"
    values = [float(line.split(",")[1]) for line in rows[1:]]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert all(0.0 <= v <= 1.0 for v in values)


def test_out_dir_refusal_without_force(plan_run):
    cfg, _, _ = plan_run
    with pytest.raises(ConfigError, match="--force"):
        run(cfg)


def test_plan_rerun_is_byte_identical(plan_run, tmp_path):
    cfg, out, _ = plan_run
    import dataclasses
    again = dataclasses.replace(cfg, out=str(tmp_path / "b"),
                                planner=dict(cfg.planner),
                                learner=dict(cfg.learner),
                                seeds=list(cfg.seeds))
    out2, _ = run(again)
    a = (out / "seed_0" / "progress.csv").read_bytes()
    b = (out2 / "seed_0" / "progress.csv").read_bytes()
    assert a == b


# --------------------------------------------------------------- train runs

def test_train_artifact_layout(tmp_path):
    cfg = ExperimentConfig(task="box_push_1d", mode="train", seeds=[0],
                           out=str(tmp_path / "t"), learner=dict(TINY_LEARNER))
    out, results = run(cfg)
    res = results["0"]
    assert "error" not in res
    metrics = (out / "seed_0" / "metrics.csv").read_text().splitlines()
    assert metrics[0] == ("epoch,env_steps,success_rate,mean_episode_reward,"
                          "demo_fraction,critic_loss,actor_objective")
    assert len(metrics) == 2
    assert (out / "seed_0" / "checkpoint.bin").exists()
    assert (out / "success.svg").exists()
    assert set(res) >= {"epochs", "env_steps", "final_success",
                        "best_success", "average_success", "wall_seconds"}


def test_run_records_seed_errors(tmp_path):
    learner = dict(TINY_LEARNER, pretrain_policy=True, epsilon=1e-9)
    cfg = ExperimentConfig(task="box_push_1d", mode="train", seeds=[0, 1],
                           out=str(tmp_path / "t"), learner=learner,
                           demo_trees=1, demo_max_nodes=40,
                           demo_stop_progress=0.5)
    out, results = run(cfg)
    for seed in ("0", "1"):
        assert "error" in results[seed]
        assert "ValueError" in results[seed]["error"]
    # manifest still written, no aggregate plot from zero good seeds
    assert (out / "manifest.json").exists()
    assert not (out / "success.svg").exists()


# ------------------------------------------------------------------- sweeps

def test_sweep_aggregates_cells(tmp_path):
    cfg = ExperimentConfig(task="box_push_1d", mode="sweep", seeds=[0, 1],
                           out=str(tmp_path / "s"), max_nodes=40,
                           sweep_param="planner.n_goals",
                           sweep_values=[10, 20],
                           sweep_metric="average_progress")
    out, all_results = run(cfg)
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0] == "value,mean,std,ok_seeds,total_seeds"
    assert len(rows) == 3
    for row, value in zip(rows[1:], (10, 20)):
        cells = row.split(",")
        assert cells[0] == str(value)
        per_seed = [all_results[str(value)][s]["average_progress"]
                    for s in ("0", "1")]
        assert float(cells[1]) == pytest.approx(np.mean(per_seed))
        assert float(cells[2]) == pytest.approx(np.std(per_seed))
        assert cells[3] == "2" and cells[4] == "2"
        assert (out / f"cell_{value}" / "manifest.json").exists()
    assert (out / "sweep.svg").exists()


# -------------------------------------------------------------------- plots

def test_emit_plot_well_formed_svg(tmp_path):
    rng = np.random.default_rng(0)
    x = np.arange(50)
    series = [{"label": name, "x": x,
               "runs": [rng.normal(size=50).cumsum() for _ in range(3)]}
              for name in ("alpha", "beta")]
    path = tmp_path / "p.svg"
    svg = emit_plot(series, path, title="demo", x_label="t", y_label="y")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    text = path.read_text()
    assert "alpha" in text and "beta" in text and "demo" in text
    assert text.count("polyline") >= 2


def test_emit_plot_rejects_bad_input(tmp_path):
    with pytest.raises(ValueError):
        emit_plot([], tmp_path / "x.svg")
    with pytest.raises(ValueError):
        emit_plot([{"label": "a", "x": np.arange(5),
                    "runs": [np.arange(4)]}], tmp_path / "x.svg")


def test_emit_plot_large_series_is_fast(tmp_path):
    x = np.arange(10000)
    runs = [np.sin(x / 100.0) + 0.1 * k for k in range(3)]
    t0 = time.time()
    emit_plot([{"label": "wave", "x": x, "runs": runs}], tmp_path / "w.svg")
    assert time.time() - t0 < 1.0


def test_emit_bar_plot_marks_missing(tmp_path):
    path = tmp_path / "b.svg"
    svg = emit_bar_plot(["a", "b"], [0.5, float("nan")], [0.1, 0.0], path)
    ET.fromstring(svg)
    assert "missing" in svg


# ---------------------------------------------------------------------- CLI

def test_cli_plan_exit_zero(tmp_path, capsys):
    code = main(["plan", "--task", "box_push_1d", "--seeds", "0",
                 "--out", str(tmp_path / "cli"), "--set", "max_nodes=40"])
    assert code == 0
    captured = capsys.readouterr()
    assert "artifacts in" in captured.out
    assert (tmp_path / "cli" / "manifest.json").exists()


def test_cli_report_exit_zero(tmp_path, capsys):
    out = tmp_path / "cli"
    main(["plan", "--task", "box_push_1d", "--seeds", "0",
          "--out", str(out), "--set", "max_nodes=40"])
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    captured = capsys.readouterr()
    assert "box_push_1d" in captured.out


def test_cli_config_error_exit_two(tmp_path, capsys):
    code = main(["plan", "--task", "box_push_1d",
                 "--out", str(tmp_path / "x"), "--set", "bogus.key=1"])
    assert code == 2
    assert "config error" in capsys.readouterr().err
    code = main(["plan", "--seeds", "a,b", "--out", str(tmp_path / "y")])
    assert code == 2


def test_cli_all_seeds_failed_exit_one(tmp_path, capsys):
    config = tmp_path / "fail.cfg"
    config.write_text(
        "task = box_push_1d\nseeds = 0\ndemo_trees = 1\n"
        "demo_max_nodes = 40\ndemo_stop_progress = 0.5\n"
        "learner.pretrain_policy = true\nlearner.epsilon = 1e-9\n"
        "learner.n_epochs = 1\nlearner.n_cycles = 2\nlearner.n_steps = 8\n")
    code = main(["train", "--config", str(config),
                 "--out", str(tmp_path / "f")])
    assert code == 1
    captured = capsys.readouterr()
    assert "all seeds failed" in captured.err
