"""Fast gradient and invariant checks behind ``effaction check``."""

from __future__ import annotations

import numpy as np

from ..core import EffectiveActionTracker
from ..envs import MoveBlockEnv, zone_reward
from ..nn import finite_diff_check, init_lstm, init_mlp, lstm_backward_through_time, lstm_unroll, mlp_backward, mlp_forward


def check_mlp(rng, trials: int = 20) -> float:
    worst = 0.0
    for _ in range(trials):
        dims = [int(d) for d in rng.integers(1, 9, size=rng.integers(2, 5))]
        params = init_mlp(dims, ["relu"] * (len(dims) - 2) + ["linear"], rng)
        for layer in params.layers:
            layer.bias[:] = rng.normal(size=layer.bias.shape)
        x = rng.normal(size=(3, dims[0]))
        w = rng.normal(size=(3, dims[-1]))

        def loss():
            return float(np.sum(w * mlp_forward(params, x)[0]))

        _, cache = mlp_forward(params, x)
        grads, _ = mlp_backward(params, cache, w)
        worst = max(worst, finite_diff_check(loss, params.arrays(), grads).max_rel_error)
    return worst


def check_lstm(rng, trials: int = 20) -> float:
    worst = 0.0
    for _ in range(trials):
        I, H, L = int(rng.integers(1, 5)), int(rng.integers(1, 5)), int(rng.integers(1, 6))
        params = init_lstm(I, H, rng)
        params.bias[:] = rng.normal(size=params.bias.shape)
        xs = rng.normal(size=(L, 2, I))
        w = rng.normal(size=(L, 2, H))
        zeros = np.zeros((2, H))

        def loss():
            hs, _ = lstm_unroll(params, xs, zeros, zeros)
            return float(np.sum(w * np.asarray(hs)))

        _, caches = lstm_unroll(params, xs, zeros, zeros)
        grads, _ = lstm_backward_through_time(params, caches, list(w))
        worst = max(worst, finite_diff_check(loss, params.arrays(), grads).max_rel_error)
    return worst


def check_tracker(rng, trials: int = 200) -> float:
    worst = 0.0
    for _ in range(trials):
        lam = float(rng.choice([0.5, 0.9, 0.99]))
        actions = rng.integers(0, 6, size=rng.integers(1, 200)).astype(float)
        tr = EffectiveActionTracker(lam)
        for a in actions:
            tr.update(a)
        n = len(actions)
        closed = float(np.sum(lam ** (n - 1 - np.arange(n)) * actions))
        worst = max(worst, abs(tr.value - closed))
    return worst


def check_rewards() -> bool:
    return (zone_reward(120, 121, 0) == 10.0 and zone_reward(95, 94, 1) == -1.1
            and zone_reward(160, 162, 0) == -1.0 and zone_reward(80, 65, 0) == -100.0)


def check_prolonged() -> int:
    env = MoveBlockEnv()
    env.reset(np.random.default_rng(0))
    env.position = 1.0
    env.step(1)
    moving = 1
    while env.velocity > 0:
        env.step(0)
        moving += 1
    return moving


def run_checks(seed: int = 0) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    mlp = check_mlp(rng)
    lstm = check_lstm(rng)
    tracker = check_tracker(rng)
    steps = check_prolonged()
    return [
        ("mlp gradient", mlp < 1e-4, f"max relative error {mlp:.2e} over 20 trials"),
        ("lstm gradient", lstm < 1e-4, f"max relative error {lstm:.2e} over 20 trials"),
        ("effective action closed form", tracker < 1e-9, f"max abs error {tracker:.2e}"),
        ("zone reward examples", check_rewards(), "four reference transitions"),
        ("moveblock prolongedness", abs(steps - 34) <= 1, f"unit push moves the block for {steps} steps"),
    ]
