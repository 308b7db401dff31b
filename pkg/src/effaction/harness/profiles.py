"""Named experiment profiles used by the scripts and the acceptance suite.

The desk glucose profile shrinks the networks and batches so one CPU core can
finish 3000-episode runs, and compresses the epsilon schedule so exploration
decays over that horizon instead of the full-scale 2500-episode constant.
"""

from __future__ import annotations

from .config import RunConfig

DEEP_AGENTS = ("dqn", "eff-dqn", "adrqn")

GLUCOSE_DESK_AGENT = {"hidden": 32, "batch_size": 32, "train_every": 4}
GLUCOSE_DESK_TAU = 750.0
GLUCOSE_DESK_EPISODES = 3000

MOVEBLOCK_EPISODES = 20000


def glucose_desk(agent: str, seed: int, episodes: int = GLUCOSE_DESK_EPISODES, out: str = "runs",
                 **agent_overrides) -> RunConfig:
    params = {**GLUCOSE_DESK_AGENT, **agent_overrides} if agent in DEEP_AGENTS else dict(agent_overrides)
    return RunConfig(env="glucose", agent=agent, episodes=episodes, seed=seed, tau=GLUCOSE_DESK_TAU, out=out,
                     agent_params=params)


def moveblock(agent: str, seed: int, episodes: int = MOVEBLOCK_EPISODES, out: str = "runs") -> RunConfig:
    # a tabular checkpoint of eff-q is 48 MB, so only the final one is kept
    return RunConfig(env="moveblock", agent=agent, episodes=episodes, seed=seed, out=out, checkpoint_every=0)
