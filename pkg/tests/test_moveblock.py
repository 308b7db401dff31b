import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effaction.core import EffectiveActionTracker, Termination
from effaction.envs import MoveBlockConfig, MoveBlockEnv


def at(position, config=None):
    env = MoveBlockEnv(config)
    env.reset(np.random.default_rng(0))
    env.position = position
    return env


def test_reset_range_and_rest(rng):
    env = MoveBlockEnv()
    for _ in range(200):
        p = env.reset(rng)
        assert 0.0 <= p <= 2.0
        assert env.velocity == 0.0 and env.steps == 0


def test_reset_seeded():
    a = MoveBlockEnv().reset(np.random.default_rng(4))
    b = MoveBlockEnv().reset(np.random.default_rng(4))
    assert a == b


def test_statics():
    env = at(1.0)
    p, r, done = env.step(0)
    assert (p, r, done) == (1.0, 0.0, False)


def test_unit_force_prolonged_motion():
    env = at(0.5)
    positions = [env.position]
    for t in range(120):
        positions.append(env.step(1 if t == 3 else 0)[0])
    moving = [t for t in range(1, len(positions)) if positions[t] > positions[t - 1]]
    assert moving == list(range(4, 4 + 34))
    ceil = math.ceil(env.config.force_gain / env.config.mu_k)
    assert len(moving) == ceil
    assert len(set(positions[4 + 34:])) == 1


@pytest.mark.parametrize("a", [1, 2, 3, 4, 5])
def test_duration_scales_with_amplitude(a):
    cfg = MoveBlockConfig(goal=1999.0)
    env = at(0.0, cfg)
    env.step(a)
    n = 1
    while env.velocity > 0:
        env.step(0)
        n += 1
    expected = a * cfg.force_gain / cfg.mu_k
    assert abs(n - expected) <= 1


def test_overlapping_pushes_add_velocity():
    base, both = at(0.2), at(0.2)
    base.step(1)
    both.step(1)
    for _ in range(4):
        base.step(0)
        both.step(0)
    v_alone = base.velocity
    both.step(2)
    base.step(0)
    assert both.velocity == pytest.approx(base.velocity + 2 * both.config.force_gain, abs=1e-12)
    assert both.velocity > v_alone


def test_goal_and_effort_rewards():
    env = at(8.95)
    env.velocity = 0.0
    _, r, done = env.step(1)
    assert r == 100.0 and done and env.termination is Termination.GOAL_REACHED
    env = at(0.0)
    _, r, done = env.step(5)
    assert r == pytest.approx(-2.5) and not done


def test_step_after_done_rejected():
    env = at(8.99)
    env.step(5)
    with pytest.raises(RuntimeError):
        env.step(0)


def test_max_steps():
    env = at(0.0, MoveBlockConfig(max_steps=5))
    for _ in range(4):
        assert not env.step(0)[2]
    assert env.step(0)[2]
    assert env.termination is Termination.MAX_STEPS


def test_discretize():
    env = MoveBlockEnv()
    lo, hi = env.config.domain
    assert env.discretize(lo) == 0
    assert env.discretize(hi) == 9999
    assert env.discretize((lo + hi) / 2) == 5000


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=300), st.integers(0, 2**31))
def test_goal_reward_at_most_once(actions, seed):
    env = MoveBlockEnv()
    env.reset(np.random.default_rng(seed))
    rewards = []
    for a in actions:
        rewards.append(env.step(a)[1])
        assert env.velocity >= 0.0
        if env.done:
            break
    assert rewards.count(100.0) == (1 if env.termination is Termination.GOAL_REACHED else 0)
    assert all(r <= 0 for r in rewards if r != 100.0)


def test_effective_action_separates_aliased_positions():
    """Same position bin, different hidden velocity: vanilla state collides, augmented state does not."""
    resting = at(1.0)
    moving = at(0.9)
    tracker_rest = EffectiveActionTracker(0.99, clip_max=5.0)
    tracker_move = EffectiveActionTracker(0.99, clip_max=5.0)
    moving.step(1)
    tracker_move.update(1.0)
    assert resting.discretize(resting.position) == moving.discretize(moving.position)
    assert tracker_rest.value != tracker_move.value
    assert resting.step(0)[0] != moving.step(0)[0]


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 5), st.floats(0, 0.5), st.integers(0, 5))
def test_markov_in_hidden_state(p, v, a):
    e1, e2 = at(p), at(p)
    e1.velocity = e2.velocity = v
    assert e1.step(a) == e2.step(a)
