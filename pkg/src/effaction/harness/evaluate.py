"""Greedy evaluation rollouts from a checkpoint (or from the fixed-dose policy, which has none)."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from ..core import RngStreams, make_rng
from ..nn import load_checkpoint
from .config import RunConfig, from_sections
from .training import build_agent, build_env, run_episode

DEFAULT_EVAL_SEEDS = tuple(range(100, 200, 10))
SUMMARY_HEADER = ["seed", "start", "end", "length", "return_discounted", "termination"]


class ArchitectureMismatch(ValueError):
    pass


def config_from_manifest(meta: dict) -> RunConfig:
    run = {k: meta[k] for k in ("env", "agent", "seed", "gamma") if k in meta}
    agent = {k[6:]: v for k, v in meta.items() if k.startswith("agent.")}
    env = {k[4:]: v for k, v in meta.items() if k.startswith("env.")}
    return from_sections(run, agent, env)


def load_agent(checkpoint: str | Path, agent: str | None = None):
    """Rebuild env and agent from ``checkpoint`` and copy its parameters in."""
    meta, arrays = load_checkpoint(checkpoint)
    if agent is not None and meta.get("agent") != agent:
        raise ArchitectureMismatch(f"checkpoint holds agent {meta.get('agent')!r}, requested {agent!r}")
    cfg = config_from_manifest(meta)
    env = build_env(cfg)
    ag = build_agent(cfg, env, RngStreams(cfg.seed))
    own = ag.named_arrays()
    if [(n, a.shape) for n, a in own] != [(n, a.shape) for n, a in arrays]:
        raise ArchitectureMismatch(f"checkpoint arrays {[(n, a.shape) for n, a in arrays]} do not match "
                                   f"agent {cfg.agent!r} arrays {[(n, a.shape) for n, a in own]}")
    for (_, dst), (_, src) in zip(own, arrays):
        dst[...] = src
    for net in (getattr(ag, "online", None), getattr(ag, "target", None)):
        if net is not None:
            net.bump_version()
    if getattr(ag, "target", None) is not None:
        ag.target.load_from(ag.online)
    return cfg, env, ag


@dataclass
class EvalResult:
    summary: list = field(default_factory=list)
    trajectories: dict = field(default_factory=dict)


def rollout(env, agent, seed: int, gamma: float):
    """One greedy episode whose start state comes from the seed's env stream."""
    agent.learning = False
    rows = []

    def record(t, obs, a, r):
        if a is None:
            rows.append([0, repr(float(obs)), "", "", "", repr(0.0)])
        else:
            rows.append([t, repr(float(obs)), a, repr(float(env.magnitudes[a])), repr(float(r)),
                         repr(float(getattr(env, "last_meal", 0.0)))])

    m = run_episode(env, agent, make_rng(seed, "env"), 0.0, gamma, greedy=True, on_step=record)
    summary = [seed, rows[0][1], rows[-1][1], m.length, repr(float(m.return_discounted)), m.termination.value]
    return summary, rows


def evaluate(checkpoint: str | Path | None = None, eval_seeds=DEFAULT_EVAL_SEEDS, agent: str | None = None,
             out_dir: str | Path | None = None, config: RunConfig | None = None) -> EvalResult:
    """Greedy rollouts, one per seed. ``checkpoint=None`` is only valid for the fixed-dose agent."""
    if checkpoint is not None:
        cfg, env, ag = load_agent(checkpoint, agent)
    else:
        cfg = config or RunConfig(agent=agent or "fixed", env="glucose")
        if cfg.agent != "fixed":
            raise ArchitectureMismatch(f"agent {cfg.agent!r} needs a checkpoint to evaluate")
        env = build_env(cfg)
        ag = build_agent(cfg, env, RngStreams(cfg.seed))
    result = EvalResult()
    for seed in eval_seeds:
        row, traj = rollout(env, ag, int(seed), cfg.gamma)
        result.summary.append(row)
        result.trajectories[int(seed)] = traj
    if out_dir is not None:
        write_eval(result, Path(out_dir), "bg" if cfg.env == "glucose" else "position")
    return result


def write_eval(result: EvalResult, out: Path, obs_name: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        w.writerows(result.summary)
    for seed, traj in result.trajectories.items():
        with open(out / f"trajectory_seed{seed}.csv", "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["step", obs_name, "action", "dose", "reward", "meal_carbs"])
            w.writerows(traj)
