"""Runtime and memory against history length for ADRQN, with Effective-DQN as the flat reference.

Both agents act uniformly at random (epsilon 1) so every configuration sees
the same episodes, and training starts after a short warm-up so the measured
time is dominated by gradient steps.  Each configuration is timed ``repeats``
times and the fastest repeat is kept, which filters out scheduler noise.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

from ..agents import AdrqnAgent, DeepConfig, EffDqnAgent
from ..core import RngStreams
from ..envs import GlucoseEnv
from .training import run_episode

BENCH_HEADER = ["agent", "history", "s_per_episode", "param_count", "memory_bytes", "steps"]
DEFAULT_LENGTHS = (4, 8, 15, 30)


@dataclass
class BenchConfig:
    episodes: int = 10
    seed: int = 1
    repeats: int = 3
    hidden: int = 32
    batch_size: int = 32
    explore: int = 50
    buffer_size: int = 100_000


@dataclass(frozen=True)
class BenchRow:
    agent: str
    history: int
    s_per_episode: float
    param_count: int
    memory_bytes: int
    steps: int

    def as_row(self) -> list:
        return [self.agent, self.history, f"{self.s_per_episode:.6f}", self.param_count, self.memory_bytes,
                self.steps]


def time_agent(cls, history: int, bc: BenchConfig) -> BenchRow:
    cfg = DeepConfig(hidden=bc.hidden, batch_size=bc.batch_size, explore=bc.explore, history=history,
                     buffer_size=bc.buffer_size)
    best = float("inf")
    for _ in range(bc.repeats):
        streams = RngStreams(bc.seed)
        env = GlucoseEnv()
        agent = cls(env, cfg, rng=streams["agent"], replay_rng=streams["replay"])
        env_rng = streams["env"]
        steps = 0
        t0 = time.perf_counter()
        for _ in range(bc.episodes):
            steps += run_episode(env, agent, env_rng, 1.0, cfg.gamma).length
        best = min(best, (time.perf_counter() - t0) / max(bc.episodes, 1))
    return BenchRow(cls.name, history, best, agent.param_count(), agent.memory_bytes(), steps)


def bench(history_lengths=DEFAULT_LENGTHS, config: BenchConfig | None = None) -> list[BenchRow]:
    bc = config or BenchConfig()
    if any(L < 1 for L in history_lengths):
        raise ValueError("history lengths must be >= 1")
    rows = []
    for L in history_lengths:
        rows.append(time_agent(AdrqnAgent, L, bc))
        rows.append(time_agent(EffDqnAgent, L, bc))
    return rows


def write_bench(rows: list[BenchRow], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        w.writerows(r.as_row() for r in rows)


def read_bench(path: str | Path) -> list[BenchRow]:
    with open(path, newline="", encoding="utf-8") as f:
        return [BenchRow(r["agent"], int(r["history"]), float(r["s_per_episode"]), int(r["param_count"]),
                         int(r["memory_bytes"]), int(r["steps"])) for r in csv.DictReader(f)]
