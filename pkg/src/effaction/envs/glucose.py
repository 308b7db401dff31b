"""Surrogate type-1-diabetes patient.

Linear PK/PD chain: subcutaneous doses wait ``delay_steps`` steps in a
pipeline, then join an active-insulin pool that decays geometrically and
lowers glucose in proportion to its size. Meals follow the same shape on the
other side; the liver adds a constant drift. CGM equals blood glucose.
"""

from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ..core import Termination

TERMINAL_PENALTY = -100.0
TARGET_REWARD = 10.0
TREND_PENALTY = -1.0
TREND_THRESHOLD = 0.5
DOSE_COST = 0.1


@dataclass(frozen=True)
class MealEvent:
    step: int
    carbs: float

    def __post_init__(self):
        if self.step < 0 or self.carbs <= 0:
            raise ValueError(f"invalid meal {self}")


DEFAULT_MEALS = (MealEvent(60, 40.0), MealEvent(240, 60.0))


@dataclass(frozen=True)
class GlucoseConfig:
    dt_minutes: float = 3.0
    delay_steps: int = 5
    insulin_decay: float = 0.98
    insulin_sensitivity: float = 0.3
    egp: float = 0.3
    meals: tuple = DEFAULT_MEALS
    meal_decay: float = 0.9
    meal_gain: float = 0.5
    magnitudes: tuple = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    start_range: tuple = (150.0, 195.0)
    terminal_low: float = 70.0
    terminal_high: float = 200.0
    max_steps: int = 480

    def __post_init__(self):
        if not (0 < self.insulin_decay < 1 and 0 < self.meal_decay < 1):
            raise ValueError("insulin_decay and meal_decay must lie in (0, 1)")
        if self.delay_steps < 0:
            raise ValueError("delay_steps must be >= 0")
        if min(self.insulin_sensitivity, self.egp, self.meal_gain) < 0:
            raise ValueError("gains must be nonnegative")
        lo, hi = self.start_range
        if not self.terminal_low < lo <= hi < self.terminal_high:
            raise ValueError("start range must sit strictly inside the terminal bounds")
        meals = tuple(m if isinstance(m, MealEvent) else MealEvent(**m) for m in self.meals)
        for m in meals:
            if m.step >= self.max_steps:
                raise ValueError(f"meal at step {m.step} is beyond max_steps={self.max_steps}")
        object.__setattr__(self, "meals", meals)
        object.__setattr__(self, "magnitudes", tuple(float(m) for m in self.magnitudes))
        object.__setattr__(self, "start_range", tuple(float(x) for x in self.start_range))

    @classmethod
    def from_dict(cls, d: dict) -> "GlucoseConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown glucose config keys: {sorted(unknown)}")
        d = dict(d)
        for k in ("magnitudes", "start_range"):
            if k in d:
                d[k] = tuple(d[k])
        if "meals" in d:
            d["meals"] = tuple(MealEvent(**m) if isinstance(m, dict) else m for m in d["meals"])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["meals"] = [asdict(m) for m in self.meals]
        d["magnitudes"] = list(self.magnitudes)
        d["start_range"] = list(self.start_range)
        return d


def zone_reward(bg_prev: float, bg: float, dose_magnitude: float) -> float:
    """State reward for the move ``bg_prev -> bg`` minus the quadratic dose penalty.

    The case list is checked in order; readings that match none of the cases
    (hyperglycemic but falling, hypoglycemic but rising fast) score 0.
    """
    delta = bg - bg_prev
    if bg < 70.0 or bg > 200.0:
        r = TERMINAL_PENALTY
    elif bg < 100.0 and delta < TREND_THRESHOLD:
        r = TREND_PENALTY
    elif bg > 150.0 and delta > TREND_THRESHOLD:
        r = TREND_PENALTY
    elif 100.0 <= bg <= 150.0:
        r = TARGET_REWARD
    else:
        r = 0.0
    return r - DOSE_COST * dose_magnitude ** 2


def fixed_dose_policy(bg: float) -> int:
    """Hand-crafted step policy: 5 units at 190-200 mg/dL, one unit less per 10 mg/dL, none below 150."""
    if bg < 150.0:
        return 0
    if bg >= 190.0:
        return 5
    return int((bg - 150.0) // 10.0) + 1


class GlucoseEnv:
    name = "glucose"

    def __init__(self, config: GlucoseConfig | None = None):
        self.config = config or GlucoseConfig()
        self.magnitudes = self.config.magnitudes
        self.num_actions = len(self.magnitudes)
        self.max_magnitude = max(self.magnitudes)
        self._meals = {}
        for m in self.config.meals:
            self._meals[m.step] = self._meals.get(m.step, 0.0) + m.carbs
        self.bg = 0.0
        self.pipeline: deque = deque()
        self.active_insulin = 0.0
        self.active_meal = 0.0
        self.t = 0
        self.done = True
        self.termination: Termination | None = None
        self.last_meal = 0.0

    def reset(self, rng: np.random.Generator) -> float:
        lo, hi = self.config.start_range
        self.bg = float(rng.uniform(lo, hi))
        self.pipeline = deque([0.0] * self.config.delay_steps)
        self.active_insulin = 0.0
        self.active_meal = 0.0
        self.t = 0
        self.done = False
        self.termination = None
        self.last_meal = 0.0
        return self.bg

    def step(self, dose: int) -> tuple[float, float, bool]:
        if self.done:
            raise RuntimeError("step() called on a finished episode; call reset()")
        cfg = self.config
        a = self.magnitudes[dose]
        if cfg.delay_steps:
            arriving = self.pipeline.popleft()
            self.pipeline.append(a)
        else:
            arriving = a
        self.active_insulin = cfg.insulin_decay * self.active_insulin + arriving
        carbs = self._meals.get(self.t, 0.0)
        self.last_meal = carbs
        self.active_meal = cfg.meal_decay * self.active_meal + carbs
        bg_prev = self.bg
        bg = (bg_prev + cfg.egp - cfg.insulin_sensitivity * self.active_insulin
              + cfg.meal_gain * (1.0 - cfg.meal_decay) * self.active_meal)
        self.bg = bg
        self.t += 1
        reward = zone_reward(bg_prev, bg, a)
        if bg < cfg.terminal_low:
            self.termination = Termination.HYPO_DEATH
        elif bg > cfg.terminal_high:
            self.termination = Termination.HYPER_DEATH
        elif self.t >= cfg.max_steps:
            self.termination = Termination.MAX_STEPS
        self.done = self.termination is not None
        return bg, reward, self.done
