"""Replay storage: flat transitions for the feed-forward agents, episode-aware windows for ADRQN."""

from __future__ import annotations

import numpy as np

NULL_ACTION = -1


class ReplayBuffer:
    """FIFO ring of ``(state, action, reward, next_state, done)``; uniform sampling with replacement."""

    def __init__(self, capacity: int, state_dim: int, rng: np.random.Generator):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.state_dim = state_dim
        self.rng = rng
        self.states = np.zeros((capacity, state_dim))
        self.next_states = np.zeros((capacity, state_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.insert_ids = np.full(capacity, -1, dtype=np.int64)
        self._next = 0
        self.size = 0
        self.inserted = 0

    def __len__(self) -> int:
        return self.size

    def add(self, state, action: int, reward: float, next_state, done: bool) -> None:
        j = self._next
        self.states[j] = state
        self.actions[j] = action
        self.rewards[j] = reward
        self.next_states[j] = next_state
        self.dones[j] = float(done)
        self.insert_ids[j] = self.inserted
        self.inserted += 1
        self._next = (j + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int):
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = self.rng.integers(0, self.size, size=batch_size)
        return (self.states[idx], self.actions[idx], self.rewards[idx],
                self.next_states[idx], self.dones[idx])

    def entry_bytes(self) -> int:
        return 8 * (2 * self.state_dim + 4)

    def footprint_bytes(self) -> int:
        return self.capacity * self.entry_bytes()


class EpisodeReplay:
    """Transitions tagged with their episode, sampled as fixed-length history windows.

    Slot ``j`` holds step ``t`` of some episode: the observation ``o_t``, the
    action that led to it (``NULL_ACTION`` at ``t = 0``), the action taken,
    the reward and ``o_{t+1}``. A window ending at ``t`` is the sequence of
    ``(prev_action, observation)`` pairs for steps ``t-L+1 .. t``; steps
    before the episode start (or already evicted) are zero padding with the
    null action.
    """

    def __init__(self, capacity: int, history: int, rng: np.random.Generator):
        if capacity < 1 or history < 1:
            raise ValueError("capacity and history must be >= 1")
        self.capacity = capacity
        self.history = history
        self.rng = rng
        self.obs = np.zeros(capacity)
        self.prev_actions = np.full(capacity, NULL_ACTION, dtype=np.int64)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_obs = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.episode = np.full(capacity, -1, dtype=np.int64)
        self.step = np.zeros(capacity, dtype=np.int64)
        self._next = 0
        self.size = 0
        self._episode = -1
        self._t = 0
        self._prev = NULL_ACTION

    def __len__(self) -> int:
        return self.size

    def start_episode(self) -> None:
        self._episode += 1
        self._t = 0
        self._prev = NULL_ACTION

    def add(self, obs: float, action: int, reward: float, next_obs: float, done: bool) -> None:
        if self._episode < 0:
            raise RuntimeError("start_episode() must be called before add()")
        j = self._next
        self.obs[j] = obs
        self.prev_actions[j] = self._prev
        self.actions[j] = action
        self.rewards[j] = reward
        self.next_obs[j] = next_obs
        self.dones[j] = float(done)
        self.episode[j] = self._episode
        self.step[j] = self._t
        self._t += 1
        self._prev = action
        self._next = (j + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _history(self, idx: np.ndarray, length: int):
        """``length`` pairs ending at slot ``idx`` (inclusive): obs (length, B), prev action (length, B)."""
        back = np.arange(length - 1, -1, -1)[:, None]
        pos = (idx[None, :] - back) % self.capacity
        want = self.step[idx][None, :] - back
        # a wrapped ring can hold a later step of the same episode in an older slot
        valid = (want >= 0) & (self.episode[pos] == self.episode[idx][None, :]) & (self.step[pos] == want)
        obs = np.where(valid, self.obs[pos], 0.0)
        prev = np.where(valid, self.prev_actions[pos], NULL_ACTION)
        return obs, prev

    def windows(self, idx: np.ndarray):
        """Online windows ending at each sampled step and target windows shifted one step later."""
        L = self.history
        obs, prev = self._history(idx, L)
        if L > 1:
            t_obs, t_prev = self._history(idx, L - 1)
            t_obs = np.concatenate([t_obs, self.next_obs[idx][None, :]])
            t_prev = np.concatenate([t_prev, self.actions[idx][None, :]])
        else:
            t_obs = self.next_obs[idx][None, :]
            t_prev = self.actions[idx][None, :]
        return obs, prev, t_obs, t_prev

    def sample(self, batch_size: int):
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = self.rng.integers(0, self.size, size=batch_size)
        obs, prev, t_obs, t_prev = self.windows(idx)
        return obs, prev, self.actions[idx], self.rewards[idx], t_obs, t_prev, self.dones[idx]

    def entry_bytes(self) -> int:
        return 8 * 8

    def footprint_bytes(self) -> int:
        return self.capacity * self.entry_bytes()
