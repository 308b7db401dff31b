import csv
import subprocess
import sys

import numpy as np
import pytest

from effaction.harness import (ArchitectureMismatch, ConfigError, RunConfig, bench, dump_config, evaluate,
                               load_config, parse_config, read_metrics, train)
from effaction.harness.bench import BenchConfig, read_bench, write_bench
from effaction.harness.cli import main
from effaction.harness.plot import PlotError, plot_bench, plot_learning_curve, plot_trajectory, plot_zones
from effaction.harness.training import METRICS_HEADER
from effaction.nn import load_checkpoint
from effaction.harness import training as train_mod

TINY = {"hidden": 8, "batch_size": 8, "explore": 50, "history": 3, "buffer_size": 500}


def tiny(agent="eff-dqn", episodes=5, tmp_path=None, **kw):
    params = dict(TINY) if agent in ("dqn", "eff-dqn", "adrqn") else {}
    return RunConfig(agent=agent, episodes=episodes, out=str(tmp_path or "runs"), agent_params=params,
                     checkpoint_every=2, **kw)


# --- config --------------------------------------------------------------------

def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="hiden"):
        RunConfig(agent_params={"hiden": 3})
    with pytest.raises(ConfigError, match="colour"):
        parse_config("[run]\ncolour = red\n")
    with pytest.raises(ConfigError, match="extra"):
        parse_config("[extra]\nx = 1\n")
    with pytest.raises(ConfigError, match="valid agents"):
        RunConfig(agent="sarsa")
    with pytest.raises(ConfigError):
        RunConfig(agent="q", env="glucose")


def test_config_parse_and_snapshot_roundtrip():
    text = """
[run]
agent = adrqn
episodes = 12
seed = 4

[schedule]
tau = 750

[agent]
hidden = 32
history = 8

[env]
meals = 30:20, 100:50
"""
    cfg = parse_config(text)
    assert cfg.agent == "adrqn" and cfg.episodes == 12 and cfg.tau == 750.0
    assert cfg.deep_config().history == 8 and cfg.deep_config().learning_rate == 1e-3
    assert [m.step for m in cfg.env_config().meals] == [30, 100]
    snap = dump_config(cfg)
    again = parse_config(snap)
    assert dump_config(again) == snap
    assert again.deep_config() == cfg.deep_config() and again.env_config() == cfg.env_config()


def test_dqn_learning_rate_default():
    assert RunConfig(agent="dqn").deep_config().learning_rate == 1e-6
    assert RunConfig(agent="eff-dqn").deep_config().learning_rate == 1e-3


# --- train ---------------------------------------------------------------------

def test_zero_episode_run(tmp_path):
    res = train(tiny(episodes=0, tmp_path=tmp_path))
    lines = (res.run_dir / "metrics.csv").read_text().splitlines()
    assert lines == [",".join(METRICS_HEADER)]
    assert (res.run_dir / "checkpoints" / "final.manifest").exists()
    assert load_config(res.run_dir / "config.ini").episodes == 0


def test_same_seed_identical_metrics(tmp_path):
    a = train(tiny(tmp_path=tmp_path / "a"))
    b = train(tiny(tmp_path=tmp_path / "b"))
    assert (a.run_dir / "metrics.csv").read_bytes() == (b.run_dir / "metrics.csv").read_bytes()
    assert ((a.run_dir / "checkpoints" / "final.bin").read_bytes()
            == (b.run_dir / "checkpoints" / "final.bin").read_bytes())
    c = train(tiny(tmp_path=tmp_path / "c", seed=2))
    assert (a.run_dir / "metrics.csv").read_bytes() != (c.run_dir / "metrics.csv").read_bytes()


def test_snapshot_rerun_reproduces(tmp_path):
    a = train(tiny(agent="adrqn", tmp_path=tmp_path / "a"))
    cfg = load_config(a.run_dir / "config.ini").replace(out=str(tmp_path / "b"))
    b = train(cfg)
    assert (a.run_dir / "metrics.csv").read_bytes() == (b.run_dir / "metrics.csv").read_bytes()


def test_metrics_rows_and_checkpoint_cadence(tmp_path):
    res = train(tiny(tmp_path=tmp_path))
    rows = read_metrics(res.run_dir / "metrics.csv")
    assert [r["episode"] for r in rows] == list(range(5))
    for r, m in zip(rows, res.metrics):
        assert r["length"] == r["steps_hypo"] + r["steps_target"] + r["steps_hyper"] + (r["termination"] != "MaxSteps")
        assert r["return_discounted"] == m.return_discounted
    ckpts = sorted(p.name for p in (res.run_dir / "checkpoints").glob("*.manifest"))
    assert ckpts == ["ep000002.manifest", "ep000004.manifest", "final.manifest"]
    meta, arrays = load_checkpoint(res.run_dir / "checkpoints" / "final")
    assert meta["agent"] == "eff-dqn" and meta["episode"] == "5"
    assert sum(a.size for _, a in arrays) == res.agent.param_count()
    timing = list(csv.DictReader(open(res.run_dir / "timing.csv")))
    assert len(timing) == 5


def test_fixed_dose_training_mostly_hypo(tmp_path):
    res = train(RunConfig(agent="fixed", episodes=10, out=str(tmp_path)))
    rows = read_metrics(res.run_dir / "metrics.csv")
    assert sum(r["termination"] == "HypoDeath" for r in rows) > 5


def test_divergence_keeps_partial_artifacts(tmp_path, monkeypatch):
    from effaction.nn import DivergenceError

    real = train_mod.run_episode
    calls = {"n": 0}

    def flaky(*a, **k):
        calls["n"] += 1
        if calls["n"] == 3:
            raise DivergenceError("non-finite loss")
        return real(*a, **k)

    monkeypatch.setattr(train_mod, "run_episode", flaky)
    res = train(tiny(tmp_path=tmp_path))
    assert res.diverged and "episode 2" in res.diverged
    assert len(read_metrics(res.run_dir / "metrics.csv")) == 2
    assert (res.run_dir / "status.txt").read_text().startswith("diverged")


def test_crash_leaves_parseable_metrics(tmp_path):
    cfg = tiny(episodes=100000, tmp_path=tmp_path)
    snap = tmp_path / "crash.ini"
    snap.write_text(dump_config(cfg))
    proc = subprocess.Popen([sys.executable, "-m", "effaction", "train", "--config", str(snap)],
                            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    metrics = tmp_path / "glucose-eff-dqn-seed1" / "metrics.csv"
    import time
    deadline = time.time() + 60
    while time.time() < deadline and (not metrics.exists() or len(metrics.read_text().splitlines()) < 4):
        time.sleep(0.1)
    proc.kill()
    proc.wait()
    rows = read_metrics(metrics)
    assert len(rows) >= 3
    assert [r["episode"] for r in rows] == list(range(len(rows)))


# --- evaluate ------------------------------------------------------------------

def test_evaluate_from_checkpoint(tmp_path):
    res = train(tiny(tmp_path=tmp_path))
    ck = res.run_dir / "checkpoints" / "final"
    e1 = evaluate(ck, [100, 110, 120], out_dir=tmp_path / "ev")
    e2 = evaluate(ck, [100, 110, 120])
    assert len(e1.summary) == 3
    assert e1.trajectories == e2.trajectories
    header = (tmp_path / "ev" / "trajectory_seed100.csv").read_text().splitlines()[0]
    assert header == "step,bg,action,dose,reward,meal_carbs"
    with pytest.raises(ArchitectureMismatch):
        evaluate(ck, [100], agent="adrqn")


def test_evaluate_restores_parameters(tmp_path):
    res = train(tiny(agent="adrqn", tmp_path=tmp_path))
    from effaction.harness.evaluate import load_agent

    _, _, ag = load_agent(res.run_dir / "checkpoints" / "final")
    for (_, a), (_, b) in zip(ag.named_arrays(), res.agent.named_arrays()):
        assert np.array_equal(a, b)


def test_architecture_mismatch_on_shapes(tmp_path):
    res = train(tiny(tmp_path=tmp_path))
    ck = res.run_dir / "checkpoints" / "final"
    text = ck.with_suffix(".manifest").read_text().replace("agent.hidden = 8", "agent.hidden = 9")
    ck.with_suffix(".manifest").write_text(text)
    with pytest.raises(ArchitectureMismatch):
        evaluate(ck, [100])


def test_fixed_dose_default_seeds_all_hypo():
    res = evaluate(agent="fixed")
    assert [r[0] for r in res.summary] == list(range(100, 200, 10))
    assert all(float(r[2]) < 70 for r in res.summary)


# --- bench ---------------------------------------------------------------------

def test_bench_shape(tmp_path):
    rows = bench([2, 6], BenchConfig(episodes=2, repeats=1, hidden=4, batch_size=4, explore=10))
    ad = [r for r in rows if r.agent == "adrqn"]
    ed = [r for r in rows if r.agent == "eff-dqn"]
    assert ad[0].memory_bytes < ad[1].memory_bytes
    assert ed[0].memory_bytes == ed[1].memory_bytes and ed[0].param_count == ed[1].param_count
    assert ad[0].steps == ad[1].steps == ed[0].steps
    write_bench(rows, tmp_path / "b.csv")
    back = read_bench(tmp_path / "b.csv")
    assert [(r.agent, r.history, r.memory_bytes) for r in back] == [(r.agent, r.history, r.memory_bytes) for r in rows]
    with pytest.raises(ValueError):
        bench([0])


# --- plot ----------------------------------------------------------------------

def test_plots_deterministic(tmp_path):
    runs = [train(tiny(tmp_path=tmp_path / "r", seed=s)).run_dir for s in (1, 2)]
    a = plot_learning_curve(runs, tmp_path / "a.svg", window=2).read_bytes()
    b = plot_learning_curve(runs, tmp_path / "b.svg", window=2).read_bytes()
    assert a == b and a.startswith(b"<?xml") and b'version="1.1"' in a
    plot_zones(runs[:1], tmp_path / "z.svg", window=2)
    assert (tmp_path / "z_eff-dqn.svg").exists()


def test_single_seed_band_has_zero_width(tmp_path):
    from effaction.harness.plot import load_runs, seed_band

    run = train(tiny(tmp_path=tmp_path)).run_dir
    _, _, std = seed_band(load_runs([run])["eff-dqn"], "return_discounted", 3)
    assert np.all(std == 0.0)


def test_trajectory_plot_marks_episode_end(tmp_path):
    evaluate(agent="fixed", eval_seeds=[100, 110], out_dir=tmp_path)
    svg = plot_trajectory([tmp_path / "trajectory_seed100.csv", tmp_path / "trajectory_seed110.csv"],
                          tmp_path / "t.svg").read_text()
    assert svg.count('class="episode-end"') == 2
    assert 'stroke="red"' in svg


def test_empty_metrics_is_an_error(tmp_path):
    run = train(tiny(episodes=0, tmp_path=tmp_path)).run_dir
    with pytest.raises(PlotError, match="no episodes"):
        plot_learning_curve([run], tmp_path / "x.svg")
    assert not (tmp_path / "x.svg").exists()
    with pytest.raises(PlotError, match="no metrics"):
        plot_learning_curve([tmp_path / "missing"], tmp_path / "x.svg")


def test_bench_plot(tmp_path):
    rows = bench([2, 3], BenchConfig(episodes=1, repeats=1, hidden=4, batch_size=4, explore=5))
    write_bench(rows, tmp_path / "bench.csv")
    plot_bench(tmp_path / "bench.csv", tmp_path / "bench.svg")
    assert (tmp_path / "bench_runtime.svg").exists() and (tmp_path / "bench_memory.svg").exists()


# --- cli -----------------------------------------------------------------------

def test_cli_train_creates_run_dir(tmp_path):
    code = main(["train", "--env", "glucose", "--agent", "eff-dqn", "--episodes", "10", "--seed", "1",
                 "--out", str(tmp_path), "--set", "agent.hidden=8", "--set", "agent.batch_size=8"])
    assert code == 0
    assert len(read_metrics(tmp_path / "glucose-eff-dqn-seed1" / "metrics.csv")) == 10


def test_cli_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for token in ("1e-06", "512", "100000", "1000", "15", "0.99"):
        assert token in out


def test_cli_unknown_agent_lists_valid(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--agent", "sarsa"])
    assert exc.value.code != 0
    err = capsys.readouterr().err
    assert "eff-dqn" in err and "adrqn" in err


def test_cli_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        main(["train", "--frobnicate"])
    assert exc.value.code == 2


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[agent]\nhiden = 3\n")
    assert main(["train", "--config", str(bad)]) == 2
    assert "hiden" in capsys.readouterr().err


def test_cli_divergence_exit_code(tmp_path, monkeypatch):
    from effaction.nn import DivergenceError

    def boom(*a, **k):
        raise DivergenceError("non-finite loss")

    monkeypatch.setattr(train_mod, "run_episode", boom)
    assert main(["train", "--episodes", "3", "--out", str(tmp_path)]) == 3


def test_cli_eval_and_check(tmp_path, capsys):
    assert main(["eval", "--agent", "fixed", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "summary.csv").exists()
    assert main(["check"]) == 0
    assert "FAIL" not in capsys.readouterr().out
