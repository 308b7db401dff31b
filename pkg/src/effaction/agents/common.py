"""Exploration schedule and epsilon-greedy action selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EpsilonSchedule:
    eps_start: float = 0.9
    eps_end: float = 0.05
    tau: float = 2500.0

    def __call__(self, episode: int) -> float:
        if episode < 0:
            raise ValueError("episode must be >= 0")
        return self.eps_end + (self.eps_start - self.eps_end) * math.exp(-episode / self.tau)


def epsilon(episode: int, tau: float = 2500.0) -> float:
    return EpsilonSchedule(tau=tau)(episode)


def greedy(q_values) -> int:
    """Index of the largest value; ties go to the lowest index."""
    best = 0
    best_v = q_values[0]
    for i in range(1, len(q_values)):
        if q_values[i] > best_v:
            best, best_v = i, q_values[i]
    return best


def select_action(q_values, eps: float, rng: np.random.Generator) -> int:
    n = len(q_values)
    if n == 0:
        raise ValueError("empty q_values")
    # one uniform draw per call keeps rng consumption independent of the branch taken
    u = rng.random()
    if u < eps:
        return min(int(u / eps * n), n - 1) if eps > 0 else 0
    return greedy(q_values)
