"""Run configuration: an INI-style key-value file with four sections.

``[run]``
    env, agent, episodes, seed, gamma, out, checkpoint_every
``[schedule]``
    eps_start, eps_end, tau (epsilon = eps_end + (eps_start - eps_end) * exp(-episode / tau))
``[agent]``
    hyperparameters of the chosen agent; the accepted keys depend on the agent
``[env]``
    environment parameters; the accepted keys depend on the env

Tuples are written comma-separated (``magnitudes = 0, 1, 2, 3, 4, 5``) and meals
as ``step:carbs`` pairs (``meals = 60:40, 240:60``).  Any key not in the schema
is rejected with a :class:`ConfigError` naming it.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..agents import AGENTS, DeepConfig
from ..envs import GlucoseConfig, MealEvent, MoveBlockConfig


class ConfigError(ValueError):
    pass


ENV_CONFIGS = {"glucose": GlucoseConfig, "moveblock": MoveBlockConfig}
ENVS_FOR_AGENT = {
    "fixed": ("glucose",),
    "q": ("moveblock",),
    "eff-q": ("moveblock",),
    "dqn": ("glucose", "moveblock"),
    "eff-dqn": ("glucose", "moveblock"),
    "adrqn": ("glucose", "moveblock"),
}

DEEP_KEYS = {f.name: f.type for f in fields(DeepConfig) if f.name != "gamma"}
TABULAR_KEYS = {
    "q": {"alpha": "float"},
    "eff-q": {"alpha": "float", "lam": "float", "eff_bins": "int", "clip_max": "float"},
}

# per-agent defaults that differ from the dataclass defaults
AGENT_DEFAULTS = {
    "fixed": {},
    "q": {"alpha": 0.001},
    "eff-q": {"alpha": 0.005, "lam": 0.99, "eff_bins": 100, "clip_max": 5.0},
    "dqn": {"learning_rate": 1e-6},
    "eff-dqn": {"learning_rate": 1e-3},
    "adrqn": {"learning_rate": 1e-3},
}

RUN_KEYS = {"env": "str", "agent": "str", "episodes": "int", "seed": "int", "gamma": "float",
            "out": "str", "checkpoint_every": "int"}
SCHEDULE_KEYS = {"eps_start": "float", "eps_end": "float", "tau": "float"}


def agent_schema(agent: str) -> dict:
    if agent == "fixed":
        return {}
    if agent in TABULAR_KEYS:
        return dict(TABULAR_KEYS[agent])
    return dict(DEEP_KEYS)


def env_schema(env: str) -> dict:
    return {f.name: f.type for f in fields(ENV_CONFIGS[env])}


@dataclass
class RunConfig:
    env: str = "glucose"
    agent: str = "eff-dqn"
    episodes: int = 3000
    seed: int = 1
    gamma: float = 0.99
    out: str = "runs"
    checkpoint_every: int = 1000
    eps_start: float = 0.9
    eps_end: float = 0.05
    tau: float = 2500.0
    agent_params: dict = field(default_factory=dict)
    env_params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("episodes", "seed", "checkpoint_every"):
            setattr(self, name, int(getattr(self, name)))
        for name in ("gamma", "eps_start", "eps_end", "tau"):
            setattr(self, name, float(getattr(self, name)))
        self.out = str(self.out)
        self.validate()

    def validate(self) -> None:
        if self.agent not in AGENTS:
            raise ConfigError(f"unknown agent {self.agent!r}; valid agents: {', '.join(AGENTS)}")
        if self.env not in ENV_CONFIGS:
            raise ConfigError(f"unknown env {self.env!r}; valid envs: {', '.join(ENV_CONFIGS)}")
        if self.env not in ENVS_FOR_AGENT[self.agent]:
            raise ConfigError(f"agent {self.agent!r} does not run on env {self.env!r}")
        if self.episodes < 0:
            raise ConfigError("episodes: must be >= 0")
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every: must be >= 0")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma: must lie in [0, 1]")
        if self.tau <= 0:
            raise ConfigError("tau: must be positive")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ConfigError("eps_end/eps_start: need 0 <= eps_end <= eps_start <= 1")
        for section, given, schema in (("agent", self.agent_params, agent_schema(self.agent)),
                                       ("env", self.env_params, env_schema(self.env))):
            for k in given:
                if k not in schema:
                    raise ConfigError(f"[{section}] unknown key {k!r} for {getattr(self, section)!r}")
        try:
            self.env_config()
            self.deep_config()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def resolved_agent_params(self) -> dict:
        return {**AGENT_DEFAULTS[self.agent], **self.agent_params}

    def deep_config(self) -> DeepConfig | None:
        if self.agent not in ("dqn", "eff-dqn", "adrqn"):
            return None
        return DeepConfig(gamma=self.gamma, **self.resolved_agent_params())

    def env_config(self):
        if self.env == "glucose":
            return GlucoseConfig.from_dict(self.env_params)
        return MoveBlockConfig(**self.env_params)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def format_value(value) -> str:
    if isinstance(value, (tuple, list)):
        if value and isinstance(value[0], MealEvent):
            return ", ".join(f"{m.step}:{m.carbs!r}" for m in value)
        return ", ".join(repr(float(v)) if isinstance(v, float) else str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_value(key: str, raw: str, kind: str):
    raw = raw.strip()
    try:
        if key == "meals":
            if not raw:
                return ()
            out = []
            for item in raw.split(","):
                step, carbs = item.split(":")
                out.append(MealEvent(int(step), float(carbs)))
            return tuple(out)
        if kind in ("int", int):
            return int(raw)
        if kind in ("float", float):
            return float(raw)
        if kind in ("tuple", tuple):
            return tuple(float(x) for x in raw.split(",") if x.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from exc


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for section in cp.sections():
        if section not in ("run", "schedule", "agent", "env"):
            raise ConfigError(f"unknown section [{section}]")
    run = {}
    for section, schema in (("run", RUN_KEYS), ("schedule", SCHEDULE_KEYS)):
        if cp.has_section(section):
            for k, v in cp.items(section):
                if k not in schema:
                    raise ConfigError(f"[{section}] unknown key {k!r}")
                run[k] = v
    agent = dict(cp.items("agent")) if cp.has_section("agent") else {}
    env = dict(cp.items("env")) if cp.has_section("env") else {}
    return from_sections(run, agent, env)


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def agent_section(cfg: RunConfig) -> dict:
    deep = cfg.deep_config()
    if deep is not None:
        values = {k: getattr(deep, k) for k in DEEP_KEYS}
    else:
        values = cfg.resolved_agent_params()
    return {k: format_value(v) for k, v in values.items()}


def env_section(cfg: RunConfig) -> dict:
    env_cfg = cfg.env_config()
    return {f.name: format_value(getattr(env_cfg, f.name)) for f in fields(env_cfg)}


def from_sections(run: dict, agent: dict, env: dict) -> RunConfig:
    """Rebuild a config from string-valued sections (the form stored in snapshots and manifests)."""
    top = {k: parse_value(k, v, RUN_KEYS.get(k) or SCHEDULE_KEYS[k]) for k, v in run.items()}
    name, env_name = top.get("agent", RunConfig.agent), top.get("env", RunConfig.env)
    a_schema, e_schema = agent_schema(name), env_schema(env_name)
    for section, given, schema in (("agent", agent, a_schema), ("env", env, e_schema)):
        for k in given:
            if k not in schema:
                raise ConfigError(f"[{section}] unknown key {k!r}")
    return RunConfig(**top, agent_params={k: parse_value(k, v, a_schema[k]) for k, v in agent.items()},
                     env_params={k: parse_value(k, v, e_schema[k]) for k, v in env.items()})


def dump_config(cfg: RunConfig) -> str:
    """Fully resolved form: every default is written so a snapshot is self-describing."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["run"] = {k: format_value(getattr(cfg, k)) for k in RUN_KEYS}
    cp["schedule"] = {k: format_value(getattr(cfg, k)) for k in SCHEDULE_KEYS}
    cp["agent"] = agent_section(cfg)
    cp["env"] = env_section(cfg)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def write_snapshot(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(cfg), encoding="utf-8", newline="\n")
