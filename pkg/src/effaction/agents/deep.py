"""DQN, Effective-DQN and ADRQN agents."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..core import EffectiveActionTracker
from ..nn import AdamState, DivergenceError, adam_update
from .common import greedy, select_action
from .networks import FeedForwardQNet, RecurrentQNet
from .replay import NULL_ACTION, EpisodeReplay, ReplayBuffer


@dataclass
class DeepConfig:
    """Hyperparameters shared by the gradient-based agents.

    ``obs_shift``/``obs_scale`` standardize the raw observation before the
    state embedding; ``eff_scale`` divides the effective action before its
    embedding. ``train_every`` is the number of environment steps between
    gradient steps once warm-up (``explore`` steps) is over.
    """

    learning_rate: float = 1e-3
    gamma: float = 0.99
    batch_size: int = 512
    buffer_size: int = 100_000
    explore: int = 1000
    state_embed: int = 16
    action_embed: int = 16
    hidden: int = 256
    lam: float = 0.99
    history: int = 15
    train_every: int = 1
    obs_shift: float = 125.0
    obs_scale: float = 50.0
    eff_scale: float = 10.0


def dqn_loss(online: FeedForwardQNet, target: FeedForwardQNet, states, actions, rewards,
             next_states, dones, gamma: float):
    """Mean squared Bellman error against the frozen target network, and its gradient."""
    q, cache = online.forward(states)
    q_next, _ = target.forward(next_states)
    y = rewards + gamma * (1.0 - dones) * q_next.max(axis=1)
    rows = np.arange(len(actions))
    err = y - q[rows, actions]
    loss = float(np.mean(err * err))
    if not np.isfinite(loss):
        raise DivergenceError(f"non-finite TD loss {loss}")
    dq = np.zeros_like(q)
    dq[rows, actions] = -2.0 * err / len(actions)
    return loss, online.backward(cache, dq)


class _FeedForwardAgent:
    name = "dqn"
    arch = "feedforward"
    uses_effective = False

    def __init__(self, env, config: DeepConfig | None = None, rng: np.random.Generator | None = None,
                 replay_rng: np.random.Generator | None = None):
        self.env = env
        self.config = c = config or DeepConfig()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        init_rng = np.random.default_rng(self.rng.integers(2**63))
        emb = c.action_embed if self.uses_effective else None
        self.online = FeedForwardQNet(env.num_actions, init_rng, c.state_embed, emb, c.hidden)
        self.target = FeedForwardQNet(env.num_actions, init_rng, c.state_embed, emb, c.hidden)
        self.target.load_from(self.online)
        self.optimizer = AdamState(learning_rate=c.learning_rate)
        self.replay = ReplayBuffer(c.buffer_size, self.online.input_dim,
                                   replay_rng if replay_rng is not None else np.random.default_rng(1))
        self.tracker = EffectiveActionTracker(c.lam) if self.uses_effective else None
        self.env_steps = 0
        self.grad_steps = 0
        self.last_loss = float("nan")
        self.learning = True
        self._state = None

    def features(self, obs: float) -> np.ndarray:
        c = self.config
        x = (obs - c.obs_shift) / c.obs_scale
        if self.uses_effective:
            return np.array([x, self.tracker.value / c.eff_scale])
        return np.array([x])

    def begin_episode(self, obs: float) -> None:
        if self.tracker is not None:
            self.tracker.reset()
        self._state = self.features(obs)

    def q_values(self, obs: float | None = None) -> np.ndarray:
        s = self._state if obs is None else self.features(obs)
        q, _ = self.online.forward(s)
        return q[0]

    def act(self, obs: float, eps: float) -> int:
        q = self.q_values()
        if self.env_steps < self.config.explore:
            eps = 1.0
        return select_action(q, eps, self.rng)

    def greedy_action(self, obs: float) -> int:
        return greedy(self.q_values())

    def observe(self, action: int, reward: float, next_obs: float, done: bool) -> None:
        if self.tracker is not None:
            self.tracker.update(self.env.magnitudes[action])
        nxt = self.features(next_obs)
        if not self.learning:
            self._state = nxt
            return
        self.replay.add(self._state, action, reward, nxt, done)
        self._state = nxt
        self.env_steps += 1
        c = self.config
        if self.env_steps >= c.explore and self.env_steps % c.train_every == 0:
            self.train_step()

    def train_step(self) -> float:
        c = self.config
        batch = self.replay.sample(c.batch_size)
        loss, grads = dqn_loss(self.online, self.target, *batch, c.gamma)
        adam_update(self.optimizer, self.online.arrays(), grads)
        self.online.bump_version()
        self.grad_steps += 1
        self.last_loss = loss
        return loss

    def end_episode(self) -> None:
        if self.learning:
            self.target.load_from(self.online)

    def named_arrays(self):
        return self.online.named_arrays()

    def param_count(self) -> int:
        return self.online.param_count()

    def memory_bytes(self) -> int:
        """Parameters (online, target, two Adam moments) plus replay storage plus one batch of activations."""
        c = self.config
        params = 4 * self.online.param_count() * 8
        width = self.online.state_emb.out_dim + (self.online.action_emb.out_dim if self.online.action_emb else 0)
        acts = 2 * c.batch_size * (width + 2 * c.hidden + 2 * self.env.num_actions) * 8
        return params + self.replay.footprint_bytes() + acts


class DqnAgent(_FeedForwardAgent):
    name = "dqn"


class EffDqnAgent(_FeedForwardAgent):
    """DQN over the augmented state (observation, effective action)."""

    name = "eff-dqn"
    uses_effective = True


def adrqn_loss(online: RecurrentQNet, target: RecurrentQNet, obs, prev, actions, rewards,
               t_obs, t_prev, dones, gamma: float):
    q, cache = online.forward(obs, prev)
    q_next, _ = target.forward(t_obs, t_prev)
    y = rewards + gamma * (1.0 - dones) * q_next.max(axis=1)
    rows = np.arange(len(actions))
    err = y - q[rows, actions]
    loss = float(np.mean(err * err))
    if not np.isfinite(loss):
        raise DivergenceError(f"non-finite TD loss {loss}")
    dq = np.zeros_like(q)
    dq[rows, actions] = -2.0 * err / len(actions)
    return loss, online.backward(cache, dq)


class AdrqnAgent:
    """Recurrent Q-network over (previous action, observation) windows of fixed length."""

    name = "adrqn"
    arch = "recurrent"

    def __init__(self, env, config: DeepConfig | None = None, rng: np.random.Generator | None = None,
                 replay_rng: np.random.Generator | None = None):
        self.env = env
        self.config = c = config or DeepConfig()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        init_rng = np.random.default_rng(self.rng.integers(2**63))
        self.online = RecurrentQNet(env.num_actions, init_rng, c.state_embed, c.action_embed, c.hidden)
        self.target = RecurrentQNet(env.num_actions, init_rng, c.state_embed, c.action_embed, c.hidden)
        self.target.load_from(self.online)
        self.optimizer = AdamState(learning_rate=c.learning_rate)
        self.replay = EpisodeReplay(c.buffer_size, c.history,
                                    replay_rng if replay_rng is not None else np.random.default_rng(1))
        self.env_steps = 0
        self.grad_steps = 0
        self.last_loss = float("nan")
        self.learning = True
        self._window: deque = deque(maxlen=c.history)
        self._obs = 0.0

    def scale(self, obs):
        return (np.asarray(obs) - self.config.obs_shift) / self.config.obs_scale

    def begin_episode(self, obs: float) -> None:
        L = self.config.history
        self._window = deque([(NULL_ACTION, 0.0)] * (L - 1), maxlen=L)
        self._window.append((NULL_ACTION, float(self.scale(obs))))
        self._obs = float(self.scale(obs))
        if self.learning:
            self.replay.start_episode()

    def q_values(self, window=None) -> np.ndarray:
        w = self._window if window is None else window
        if len(w) == 0:
            raise ValueError("empty history window")
        prev = np.array([[a] for a, _ in w])
        obs = np.array([[o] for _, o in w])
        q, _ = self.online.forward(obs, prev)
        return q[0]

    def act(self, obs: float, eps: float) -> int:
        q = self.q_values()
        if self.env_steps < self.config.explore:
            eps = 1.0
        return select_action(q, eps, self.rng)

    def greedy_action(self, obs: float) -> int:
        return greedy(self.q_values())

    def observe(self, action: int, reward: float, next_obs: float, done: bool) -> None:
        nxt = float(self.scale(next_obs))
        if self.learning:
            self.replay.add(self._obs, action, reward, nxt, done)
        self._window.append((action, nxt))
        self._obs = nxt
        if not self.learning:
            return
        self.env_steps += 1
        c = self.config
        if self.env_steps >= c.explore and self.env_steps % c.train_every == 0:
            self.train_step()

    def train_step(self) -> float:
        c = self.config
        batch = self.replay.sample(c.batch_size)
        loss, grads = adrqn_loss(self.online, self.target, *batch, c.gamma)
        adam_update(self.optimizer, self.online.arrays(), grads)
        self.online.bump_version()
        self.grad_steps += 1
        self.last_loss = loss
        return loss

    def end_episode(self) -> None:
        if self.learning:
            self.target.load_from(self.online)

    def named_arrays(self):
        return self.online.named_arrays()

    def param_count(self) -> int:
        return self.online.param_count()

    def memory_bytes(self) -> int:
        """Parameters and Adam moments, replay storage, and the window batch with its BPTT cache.

        The last two scale with the history length: each sampled window
        materializes ``2L`` embedded inputs per row, and backpropagation keeps
        one cell cache per unrolled step.
        """
        c = self.config
        params = 4 * self.online.param_count() * 8
        L, B, H = c.history, c.batch_size, c.hidden
        x_dim = c.state_embed + c.action_embed
        windows = 2 * L * B * (1 + self.env.num_actions + x_dim) * 8
        bptt = L * B * ((x_dim + H) + 8 * H) * 8
        return params + self.replay.footprint_bytes() + windows + bptt


class FixedDoseAgent:
    """Wraps the hand-crafted glucose dose table; nothing to learn."""

    name = "fixed"
    arch = "fixed"

    def __init__(self, env, policy=None, rng=None):
        from ..envs.glucose import fixed_dose_policy

        self.env = env
        self.policy = policy or fixed_dose_policy
        self.env_steps = 0
        self.learning = True

    def begin_episode(self, obs: float) -> None:
        pass

    def act(self, obs: float, eps: float = 0.0) -> int:
        return self.policy(obs)

    def greedy_action(self, obs: float) -> int:
        return self.policy(obs)

    def observe(self, action, reward, next_obs, done) -> None:
        self.env_steps += 1

    def end_episode(self) -> None:
        pass

    def named_arrays(self):
        return []

    def param_count(self) -> int:
        return 0

    def memory_bytes(self) -> int:
        return 0
