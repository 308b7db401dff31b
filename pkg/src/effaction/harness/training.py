"""Env-agent training loop and run-directory artifacts.

A run directory holds::

    config.ini          resolved config snapshot (re-runnable)
    metrics.csv         one row per finished episode, flushed as it is written
    timing.csv          episode, wall_ms (kept apart so metrics.csv is byte-deterministic)
    checkpoints/        epNNNNNN.{manifest,bin} every ``checkpoint_every`` episodes, plus final.*
    status.txt          "complete", "diverged at episode N: ..." while partial artifacts remain
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..agents import AGENTS, EpsilonSchedule
from ..core import EpisodeMetrics, RngStreams
from ..envs import GlucoseEnv, MoveBlockEnv
from ..nn import DivergenceError, save_checkpoint
from .config import RunConfig, agent_section, env_section, write_snapshot

METRICS_HEADER = ["episode", "return_raw", "return_discounted", "length", "steps_hypo", "steps_target",
                  "steps_hyper", "termination", "epsilon"]
TIMING_HEADER = ["episode", "wall_ms"]


def build_env(cfg: RunConfig):
    if cfg.env == "glucose":
        return GlucoseEnv(cfg.env_config())
    return MoveBlockEnv(cfg.env_config())


def build_agent(cfg: RunConfig, env, streams: RngStreams):
    cls = AGENTS[cfg.agent]
    if cfg.agent == "fixed":
        return cls(env)
    if cfg.agent in ("q", "eff-q"):
        return cls(env, gamma=cfg.gamma, rng=streams["agent"], **cfg.resolved_agent_params())
    return cls(env, cfg.deep_config(), rng=streams["agent"], replay_rng=streams["replay"])


def run_episode(env, agent, env_rng, eps: float, gamma: float, greedy: bool = False, on_step=None) -> EpisodeMetrics:
    m = EpisodeMetrics()
    obs = env.reset(env_rng)
    agent.begin_episode(obs)
    if on_step is not None:
        on_step(0, obs, None, None)
    discount = 1.0
    done = False
    while not done:
        a = agent.greedy_action(obs) if greedy else agent.act(obs, eps)
        obs, r, done = env.step(a)
        agent.observe(a, r, obs, done)
        m.return_raw += r
        m.return_discounted += discount * r
        discount *= gamma
        m.length += 1
        if env.name == "glucose":
            m.count_zone(obs)
        if on_step is not None:
            on_step(m.length, obs, a, r)
    agent.end_episode()
    m.termination = env.termination
    return m


def metrics_row(episode: int, m: EpisodeMetrics, eps: float) -> list:
    return [episode, repr(float(m.return_raw)), repr(float(m.return_discounted)), m.length, m.steps_hypo,
            m.steps_target, m.steps_hyper, m.termination.value, repr(float(eps))]


def checkpoint_meta(cfg: RunConfig, agent, episode: int) -> dict:
    meta = {"env": cfg.env, "agent": cfg.agent, "seed": cfg.seed, "gamma": repr(cfg.gamma), "episode": episode,
            "arch": agent.arch}
    for k, v in agent_section(cfg).items():
        meta[f"agent.{k}"] = v
    for k, v in env_section(cfg).items():
        meta[f"env.{k}"] = v
    return meta


@dataclass
class RunResult:
    config: RunConfig
    agent: object
    metrics: list = field(default_factory=list)
    run_dir: Path | None = None
    diverged: str | None = None


def run_dir_for(cfg: RunConfig) -> Path:
    return Path(cfg.out) / f"{cfg.env}-{cfg.agent}-seed{cfg.seed}"


def train(cfg: RunConfig, write: bool = True, run_dir: str | Path | None = None) -> RunResult:
    """Train per ``cfg``. With ``write=False`` nothing touches the disk (used for sweeps)."""
    streams = RngStreams(cfg.seed)
    env = build_env(cfg)
    agent = build_agent(cfg, env, streams)
    env_rng = streams["env"]
    schedule = EpsilonSchedule(cfg.eps_start, cfg.eps_end, cfg.tau)
    result = RunResult(cfg, agent)
    if not write:
        for ep in range(cfg.episodes):
            eps = schedule(ep)
            result.metrics.append(run_episode(env, agent, env_rng, eps, cfg.gamma))
        return result

    out = Path(run_dir) if run_dir is not None else run_dir_for(cfg)
    result.run_dir = out
    (out / "checkpoints").mkdir(parents=True, exist_ok=True)
    write_snapshot(cfg, out / "config.ini")
    status = out / "status.txt"
    status.write_text("running\n", encoding="utf-8")
    with open(out / "metrics.csv", "w", newline="", encoding="utf-8") as mf, \
            open(out / "timing.csv", "w", newline="", encoding="utf-8") as tf:
        mw = csv.writer(mf, lineterminator="\n")
        tw = csv.writer(tf, lineterminator="\n")
        mw.writerow(METRICS_HEADER)
        tw.writerow(TIMING_HEADER)
        mf.flush()
        for ep in range(cfg.episodes):
            eps = schedule(ep)
            t0 = time.perf_counter()
            try:
                m = run_episode(env, agent, env_rng, eps, cfg.gamma)
            except DivergenceError as exc:
                result.diverged = f"diverged at episode {ep}: {exc}"
                status.write_text(result.diverged + "\n", encoding="utf-8")
                return result
            wall = (time.perf_counter() - t0) * 1000.0
            result.metrics.append(m)
            mw.writerow(metrics_row(ep, m, eps))
            tw.writerow([ep, f"{wall:.3f}"])
            mf.flush()
            tf.flush()
            if cfg.checkpoint_every and (ep + 1) % cfg.checkpoint_every == 0:
                save_checkpoint(out / "checkpoints" / f"ep{ep + 1:06d}", agent.named_arrays(),
                                checkpoint_meta(cfg, agent, ep + 1))
    save_checkpoint(out / "checkpoints" / "final", agent.named_arrays(), checkpoint_meta(cfg, agent, cfg.episodes))
    status.write_text("complete\n", encoding="utf-8")
    return result


def read_metrics(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    for r in rows:
        for k in ("episode", "length", "steps_hypo", "steps_target", "steps_hyper"):
            r[k] = int(r[k])
        for k in ("return_raw", "return_discounted", "epsilon"):
            r[k] = float(r[k])
    return rows
