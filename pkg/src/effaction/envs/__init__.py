from .glucose import GlucoseConfig, GlucoseEnv, MealEvent, fixed_dose_policy, zone_reward
from .moveblock import MoveBlockConfig, MoveBlockEnv

__all__ = [
    "GlucoseConfig",
    "GlucoseEnv",
    "MealEvent",
    "MoveBlockConfig",
    "MoveBlockEnv",
    "fixed_dose_policy",
    "make_env",
    "zone_reward",
]


def make_env(name: str, **overrides):
    if name == "moveblock":
        return MoveBlockEnv(MoveBlockConfig(**overrides))
    if name == "glucose":
        return GlucoseEnv(GlucoseConfig.from_dict(overrides))
    raise ValueError(f"unknown env {name!r}; expected one of ['glucose', 'moveblock']")
