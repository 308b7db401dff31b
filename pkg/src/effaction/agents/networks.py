"""Q-network architectures assembled from the ``nn`` primitives.

* FeedForwardQNet -- state embedding (linear), an optional second embedding
  for the effective action, concatenation, one ReLU hidden layer, linear head.
  Without the second embedding this is the DQN network.
* RecurrentQNet -- per-step observation and previous-action embeddings,
  concatenated into an LSTM; the final hidden state feeds a linear head.
"""

from __future__ import annotations

import numpy as np

from ..nn import (LstmParams, MlpParams, init_lstm, init_mlp, lstm_backward_through_time, lstm_unroll,
                  mlp_backward, mlp_forward)


class FeedForwardQNet:
    def __init__(self, num_actions: int, rng: np.random.Generator, state_embed: int = 16,
                 action_embed: int | None = None, hidden: int = 256):
        self.num_actions = num_actions
        self.state_emb = init_mlp([1, state_embed], ["linear"], rng)
        self.action_emb = init_mlp([1, action_embed], ["linear"], rng) if action_embed else None
        width = state_embed + (action_embed or 0)
        self.trunk = init_mlp([width, hidden, num_actions], ["relu", "linear"], rng)
        self.input_dim = 2 if action_embed else 1

    def parts(self) -> list[tuple[str, MlpParams]]:
        out = [("state_emb", self.state_emb)]
        if self.action_emb is not None:
            out.append(("action_emb", self.action_emb))
        out.append(("trunk", self.trunk))
        return out

    def arrays(self) -> list[np.ndarray]:
        return [a for _, p in self.parts() for a in p.arrays()]

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for name, p in self.parts():
            for k, layer in enumerate(p.layers):
                out += [(f"{name}.{k}.weight", layer.weight), (f"{name}.{k}.bias", layer.bias)]
        return out

    def bump_version(self) -> None:
        for _, p in self.parts():
            p.version += 1

    def param_count(self) -> int:
        return sum(a.size for a in self.arrays())

    def load_from(self, other: "FeedForwardQNet") -> None:
        for dst, src in zip(self.arrays(), other.arrays()):
            dst[...] = src
        self.bump_version()

    def forward(self, x: np.ndarray):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.input_dim:
            raise ValueError(f"expected {self.input_dim} input features, got {x.shape[1]}")
        es, cs = mlp_forward(self.state_emb, x[:, :1])
        caches = [cs]
        if self.action_emb is not None:
            ea, ca = mlp_forward(self.action_emb, x[:, 1:2])
            es = np.concatenate([es, ea], axis=1)
            caches.append(ca)
        q, ct = mlp_forward(self.trunk, es)
        caches.append(ct)
        return q, caches

    def backward(self, caches, dq: np.ndarray) -> list[np.ndarray]:
        g_trunk, g_in = mlp_backward(self.trunk, caches[-1], dq)
        k = self.state_emb.out_dim
        g_state, _ = mlp_backward(self.state_emb, caches[0], g_in[:, :k])
        grads = list(g_state)
        if self.action_emb is not None:
            g_act, _ = mlp_backward(self.action_emb, caches[1], g_in[:, k:])
            grads += g_act
        return grads + g_trunk


def one_hot(actions: np.ndarray, num_actions: int) -> np.ndarray:
    """One-hot rows; negative entries (the null action) map to the zero vector."""
    a = np.asarray(actions)
    out = np.zeros(a.shape + (num_actions,))
    mask = a >= 0
    out[mask, a[mask]] = 1.0
    return out


class RecurrentQNet:
    def __init__(self, num_actions: int, rng: np.random.Generator, state_embed: int = 16,
                 action_embed: int = 16, hidden: int = 256):
        self.num_actions = num_actions
        self.obs_emb = init_mlp([1, state_embed], ["linear"], rng)
        self.act_emb = init_mlp([num_actions, action_embed], ["linear"], rng)
        self.lstm = init_lstm(state_embed + action_embed, hidden, rng)
        self.head = init_mlp([hidden, num_actions], ["linear"], rng)

    def arrays(self) -> list[np.ndarray]:
        return self.obs_emb.arrays() + self.act_emb.arrays() + self.lstm.arrays() + self.head.arrays()

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        return [
            ("obs_emb.0.weight", self.obs_emb.layers[0].weight), ("obs_emb.0.bias", self.obs_emb.layers[0].bias),
            ("act_emb.0.weight", self.act_emb.layers[0].weight), ("act_emb.0.bias", self.act_emb.layers[0].bias),
            ("lstm.weight", self.lstm.weight), ("lstm.bias", self.lstm.bias),
            ("head.0.weight", self.head.layers[0].weight), ("head.0.bias", self.head.layers[0].bias),
        ]

    def bump_version(self) -> None:
        for p in (self.obs_emb, self.act_emb, self.lstm, self.head):
            p.version += 1

    def param_count(self) -> int:
        return sum(a.size for a in self.arrays())

    def load_from(self, other: "RecurrentQNet") -> None:
        for dst, src in zip(self.arrays(), other.arrays()):
            dst[...] = src
        self.bump_version()

    def forward(self, obs: np.ndarray, prev_actions: np.ndarray):
        """``obs`` and ``prev_actions`` are time-major ``(L, B)``; returns Q at the last step."""
        obs = np.asarray(obs, dtype=np.float64)
        if obs.ndim != 2 or obs.shape[0] == 0:
            raise ValueError("need a nonempty time-major (L, B) window")
        L, B = obs.shape
        eo, co = mlp_forward(self.obs_emb, obs.reshape(L * B, 1))
        ea, ca = mlp_forward(self.act_emb, one_hot(prev_actions, self.num_actions).reshape(L * B, -1))
        x = np.concatenate([eo, ea], axis=1).reshape(L, B, -1)
        hs, lc = lstm_unroll(self.lstm, x)
        q, ch = mlp_forward(self.head, hs[-1])
        return q, (co, ca, lc, ch, L, B)

    def backward(self, cache, dq: np.ndarray) -> list[np.ndarray]:
        co, ca, lc, ch, L, B = cache
        g_head, dh = mlp_backward(self.head, ch, dq)
        dhs = [None] * L
        dhs[-1] = dh
        g_lstm, dxs = lstm_backward_through_time(self.lstm, lc, dhs)
        dx = np.concatenate(dxs, axis=0)
        k = self.obs_emb.out_dim
        g_obs, _ = mlp_backward(self.obs_emb, co, dx[:, :k])
        g_act, _ = mlp_backward(self.act_emb, ca, dx[:, k:])
        return g_obs + g_act + g_lstm + g_head
