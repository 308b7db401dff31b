"""Shared domain types: effective-action tracker, glucose zones, returns, seeded RNG streams."""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np


class Zone(enum.Enum):
    TERMINAL_LOW = "terminal_low"
    HYPO = "hypo"
    TARGET = "target"
    HYPER = "hyper"
    TERMINAL_HIGH = "terminal_high"


class Termination(enum.Enum):
    GOAL_REACHED = "GoalReached"
    HYPO_DEATH = "HypoDeath"
    HYPER_DEATH = "HyperDeath"
    MAX_STEPS = "MaxSteps"


@dataclass
class EffectiveActionTracker:
    """Exponentially decayed running sum of past action magnitudes.

    ``value`` after each :meth:`update` is ``lam * value + prev_action``,
    optionally clipped to ``clip_max``. Contributions that decay below
    ``truncation_epsilon`` are dropped to zero, which is how a finite effect
    horizon is expressed.
    """

    lam: float
    clip_max: float | None = None
    truncation_epsilon: float = 0.0
    value: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"lam must lie in [0, 1), got {self.lam}")
        if self.clip_max is not None and self.clip_max < 0:
            raise ValueError("clip_max must be nonnegative")
        if self.truncation_epsilon < 0:
            raise ValueError("truncation_epsilon must be nonnegative")

    def reset(self) -> float:
        self.value = 0.0
        return self.value

    def update(self, prev_action: float) -> float:
        if not prev_action >= 0.0:
            raise ValueError(f"action magnitude must be nonnegative, got {prev_action}")
        v = self.lam * self.value + prev_action
        if self.clip_max is not None and v > self.clip_max:
            v = self.clip_max
        if v < self.truncation_epsilon:
            v = 0.0
        self.value = v
        return v


class AugmentedState(NamedTuple):
    observation: float
    effective_action: float


class Transition(NamedTuple):
    state: object
    action: int
    reward: float
    next_state: object
    done: bool


@dataclass
class EpisodeMetrics:
    return_discounted: float = 0.0
    return_raw: float = 0.0
    length: int = 0
    steps_hypo: int = 0
    steps_target: int = 0
    steps_hyper: int = 0
    termination: Termination = Termination.MAX_STEPS

    def count_zone(self, bg: float) -> None:
        z = zone_of(bg)
        if z is Zone.HYPO:
            self.steps_hypo += 1
        elif z is Zone.TARGET:
            self.steps_target += 1
        elif z is Zone.HYPER:
            self.steps_hyper += 1


def zone_of(bg: float) -> Zone:
    """Classify a blood-glucose reading (mg/dL). 70 and 200 are still in-episode."""
    if not math.isfinite(bg):
        raise ValueError(f"non-finite glucose value {bg}")
    if bg < 70.0:
        return Zone.TERMINAL_LOW
    if bg < 100.0:
        return Zone.HYPO
    if bg <= 150.0:
        return Zone.TARGET
    if bg <= 200.0:
        return Zone.HYPER
    return Zone.TERMINAL_HIGH


def discounted_return(rewards: Sequence[float], gamma: float) -> float:
    total = 0.0
    g = 1.0
    for r in rewards:
        total += g * r
        g *= gamma
    return total


def smooth(series: Sequence[float], window: int) -> list[float]:
    """Trailing moving average; element i averages the last ``min(i+1, window)`` values."""
    if window < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        return []
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - window, 0)
    return list((c[idx] - c[lo]) / (idx - lo))


def stream_seed(master_seed: int, label: str) -> int:
    h = hashlib.blake2b(f"{int(master_seed)}/{label}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def make_rng(master_seed: int, label: str) -> np.random.Generator:
    """Independent generator for one component (env, agent, replay, ...) of a run."""
    return np.random.default_rng(stream_seed(master_seed, label))


@dataclass
class RngStreams:
    master_seed: int
    _cache: dict = field(default_factory=dict, repr=False)

    def __getitem__(self, label: str) -> np.random.Generator:
        if label not in self._cache:
            self._cache[label] = make_rng(self.master_seed, label)
        return self._cache[label]
