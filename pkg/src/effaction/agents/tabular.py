"""Tabular Q-learning on the discretized MoveBlock position, with and without the effective action."""

from __future__ import annotations

import numpy as np

from ..core import EffectiveActionTracker
from .common import greedy, select_action


class QTable:
    def __init__(self, num_states: int, num_actions: int, alpha: float, gamma: float):
        if not 0 <= alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        self.values = np.zeros((num_states, num_actions), dtype=np.float64)
        self.alpha = alpha
        self.gamma = gamma

    @property
    def shape(self):
        return self.values.shape

    def update(self, s: int, a: int, r: float, s_next: int, done: bool) -> float:
        q = self.values
        target = r if done else r + self.gamma * q[s_next].max()
        old = q[s, a]
        new = old + self.alpha * (target - old)
        q[s, a] = new
        return float(new)


def effective_bin(value: float, clip_max: float, k: int) -> int:
    b = int(value / clip_max * k)
    return k - 1 if b >= k else b


class TabularQAgent:
    """Q-learning over position bins only: the block's velocity is invisible to it."""

    name = "q"
    arch = "tabular"

    def __init__(self, env, alpha: float = 0.001, gamma: float = 0.99, rng=None):
        self.env = env
        self.table = QTable(env.config.bins, env.num_actions, alpha, gamma)
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._s = 0
        self.learning = True

    def state_index(self, obs: float) -> int:
        return self.env.discretize(obs)

    def begin_episode(self, obs: float) -> None:
        self._s = self.state_index(obs)

    def q_values(self, obs: float | None = None):
        s = self._s if obs is None else self.state_index(obs)
        return self.table.values[s]

    def act(self, obs: float, eps: float) -> int:
        return select_action(self.table.values[self._s].tolist(), eps, self.rng)

    def greedy_action(self, obs: float) -> int:
        return greedy(self.table.values[self._s].tolist())

    def observe(self, action: int, reward: float, next_obs: float, done: bool) -> None:
        s_next = self._advance(action, next_obs)
        if self.learning:
            self.table.update(self._s, action, reward, s_next, done)
        self._s = s_next

    def _advance(self, action: int, next_obs: float) -> int:
        return self.state_index(next_obs)

    def end_episode(self) -> None:
        pass

    def parameters(self) -> dict:
        return {"q": self.table.values}

    def named_arrays(self):
        return [("q", self.table.values)]

    def param_count(self) -> int:
        return self.table.values.size


class EffectiveQAgent(TabularQAgent):
    """Q-learning over (position bin, effective-action bin)."""

    name = "eff-q"

    def __init__(self, env, alpha: float = 0.005, gamma: float = 0.99, lam: float = 0.99,
                 eff_bins: int = 100, clip_max: float | None = None, rng=None):
        self.env = env
        self.eff_bins = eff_bins
        self.clip_max = float(clip_max if clip_max is not None else env.max_magnitude)
        self.tracker = EffectiveActionTracker(lam, clip_max=self.clip_max)
        self.table = QTable(env.config.bins * eff_bins, env.num_actions, alpha, gamma)
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._s = 0
        self.learning = True

    def state_index(self, obs: float) -> int:
        return (self.env.discretize(obs) * self.eff_bins
                + effective_bin(self.tracker.value, self.clip_max, self.eff_bins))

    def begin_episode(self, obs: float) -> None:
        self.tracker.reset()
        self._s = self.state_index(obs)

    def _advance(self, action: int, next_obs: float) -> int:
        self.tracker.update(self.env.magnitudes[action])
        return self.state_index(next_obs)
