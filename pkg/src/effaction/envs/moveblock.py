"""MoveBlock: a 1-D block on a slippery floor.

A push adds velocity, kinetic friction removes a constant amount per step, so
one action keeps moving the block for many steps. Only the position is
observed.

The 10k-bin position discretization spans a long track (``domain``) whose
start region and goal sit near the origin, so one bin is 0.2 length units
against a unit push that travels about 1.7.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import Termination


@dataclass(frozen=True)
class MoveBlockConfig:
    mu_k: float = 0.003
    force_gain: float = 0.1
    magnitudes: tuple = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    domain: tuple = (0.0, 2000.0)
    start_range: tuple = (0.0, 2.0)
    goal: float = 9.0
    max_steps: int = 1000
    bins: int = 10000
    goal_reward: float = 100.0
    effort_cost: float = 0.1

    def __post_init__(self):
        if self.mu_k <= 0 or self.force_gain <= 0:
            raise ValueError("mu_k and force_gain must be positive")
        lo, hi = self.domain
        if not lo < self.goal <= hi:
            raise ValueError("goal must lie inside the domain")
        if self.bins < 1:
            raise ValueError("bins must be >= 1")
        object.__setattr__(self, "magnitudes", tuple(float(m) for m in self.magnitudes))


class MoveBlockEnv:
    name = "moveblock"

    def __init__(self, config: MoveBlockConfig | None = None):
        self.config = config or MoveBlockConfig()
        self.magnitudes = self.config.magnitudes
        self.num_actions = len(self.magnitudes)
        self.max_magnitude = max(self.magnitudes)
        self.position = 0.0
        self.velocity = 0.0
        self.steps = 0
        self.done = True
        self.termination: Termination | None = None

    def reset(self, rng: np.random.Generator) -> float:
        lo, hi = self.config.start_range
        self.position = float(rng.uniform(lo, hi))
        self.velocity = 0.0
        self.steps = 0
        self.done = False
        self.termination = None
        return self.position

    def step(self, action: int) -> tuple[float, float, bool]:
        if self.done:
            raise RuntimeError("step() called on a finished episode; call reset()")
        cfg = self.config
        a = self.magnitudes[action]
        v = self.velocity + cfg.force_gain * a
        lo, hi = cfg.domain
        p = self.position + v
        # friction acts after the move: a stationary block pushed once travels ceil(gain*a/mu) steps
        v = v - cfg.mu_k if v > cfg.mu_k else 0.0
        if p >= hi:
            p, v = hi, 0.0
        elif p <= lo:
            p, v = lo, 0.0
        self.position, self.velocity = p, v
        self.steps += 1
        if p >= cfg.goal:
            self.done = True
            self.termination = Termination.GOAL_REACHED
            return p, cfg.goal_reward, True
        if self.steps >= cfg.max_steps:
            self.done = True
            self.termination = Termination.MAX_STEPS
        return p, -cfg.effort_cost * a * a, self.done

    def discretize(self, position: float) -> int:
        lo, hi = self.config.domain
        b = int(math.floor((position - lo) / (hi - lo) * self.config.bins))
        return min(max(b, 0), self.config.bins - 1)
