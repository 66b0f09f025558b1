"""Sigmoid tracking: reward oracle, optimal action, observation layout."""
from __future__ import annotations

import math

import numpy as np
import pytest

from ctrlbench.config import default_config
from ctrlbench.environment import make_environment
from ctrlbench.envs.sigmoid import (
    SigmoidInstance,
    optimal_sigmoid_action,
    sigmoid_reward,
    sigmoid_value,
)
from ctrlbench.errors import ConfigError


def reference_reward(
    t: int,
    shifts: tuple[float, ...],
    slopes: tuple[float, ...],
    action: tuple[int, ...],
    cards: tuple[int, ...],
) -> float:
    """Independent product-payoff computation used as the oracle."""
    total = 1.0
    for a, shift, slope, card in zip(action, shifts, slopes, cards):
        curve = 1.0 / (1.0 + math.exp(-slope * (t - shift)))
        total *= 1.0 - abs(curve - a / (card - 1))
    return total


def test_reward_matches_independent_oracle_frozen_values() -> None:
    instance = SigmoidInstance(instance_id="i", shifts=(3.0, 6.0), slopes=(1.5, -2.0))
    value = sigmoid_reward(2, instance, (7, 1), (10, 5))
    assert value == reference_reward(2, (3.0, 6.0), (1.5, -2.0), (7, 1), (10, 5))
    assert value == pytest.approx(0.10129763518156824, abs=0.0, rel=0.0)

    other = SigmoidInstance(instance_id="j", shifts=(5.0, 2.0), slopes=(2.0, 1.0))
    value2 = sigmoid_reward(0, other, (0, 4), (10, 5))
    assert value2 == pytest.approx(0.11919751046351468, abs=0.0, rel=0.0)


def test_reward_matches_oracle_across_a_sweep() -> None:
    rng = np.random.default_rng(5)
    cards = (10, 5)
    for _ in range(50):
        shifts = tuple(rng.uniform(0, 10, 2))
        slopes = tuple(rng.uniform(-4, 4, 2))
        instance = SigmoidInstance(instance_id="s", shifts=shifts, slopes=slopes)
        t = int(rng.integers(0, 10))
        action = (int(rng.integers(10)), int(rng.integers(5)))
        assert sigmoid_reward(t, instance, action, cards) == reference_reward(
            t, shifts, slopes, action, cards
        )


def test_reward_lies_in_unit_interval() -> None:
    rng = np.random.default_rng(6)
    for _ in range(200):
        instance = SigmoidInstance(
            instance_id="r",
            shifts=tuple(rng.uniform(-5, 15, 2)),
            slopes=tuple(rng.uniform(-6, 6, 2)),
        )
        action = (int(rng.integers(10)), int(rng.integers(5)))
        value = sigmoid_reward(int(rng.integers(0, 12)), instance, action, (10, 5))
        assert 0.0 <= value <= 1.0


def test_sigmoid_value_extremes_do_not_overflow() -> None:
    assert sigmoid_value(0, 1000.0, 10.0) == 0.0
    assert sigmoid_value(1000, 0.0, 10.0) == 1.0
    assert sigmoid_value(0, 0.0, 1.0) == 0.5


def test_optimal_action_is_per_step_argmax() -> None:
    rng = np.random.default_rng(7)
    cards = (10, 5)
    for _ in range(40):
        instance = SigmoidInstance(
            instance_id="o",
            shifts=tuple(rng.uniform(0, 10, 2)),
            slopes=tuple(rng.uniform(-4, 4, 2)),
        )
        for t in range(10):
            best = optimal_sigmoid_action(t, instance, cards)
            best_reward = sigmoid_reward(t, instance, best, cards)
            for a0 in range(cards[0]):
                for a1 in range(cards[1]):
                    assert best_reward >= sigmoid_reward(t, instance, (a0, a1), cards)


def test_optimal_action_ties_choose_smaller_index() -> None:
    # slope 0 pins the curve at 0.5; with two levels {0, 1} both are at
    # distance 0.5, so the tie must resolve to level 0
    instance = SigmoidInstance(instance_id="t", shifts=(1.0,), slopes=(0.0,))
    assert optimal_sigmoid_action(0, instance, (2,)) == (0,)


def test_observation_layout_and_previous_action_tracking() -> None:
    config = default_config("sigmoid", {"benchmark_params": {"instance_count": 2}})
    env = make_environment(config)
    obs = env.reset()
    instance = env.current_instance
    assert obs.shape == (7,)
    assert obs[0] == config.episode_cutoff
    assert tuple(obs[1:3]) == instance.shifts
    assert tuple(obs[3:5]) == instance.slopes
    assert tuple(obs[5:7]) == (-1.0, -1.0)  # no previous action yet
    result = env.step((7, 3))
    assert result.observation[0] == config.episode_cutoff - 1
    assert tuple(result.observation[5:7]) == (7.0, 3.0)


def test_environment_reward_matches_module_oracle() -> None:
    config = default_config("sigmoid", {"benchmark_params": {"instance_count": 2}})
    env = make_environment(config)
    env.reset()
    instance = env.current_instance
    action = (4, 2)
    result = env.step(action)
    assert result.reward == sigmoid_reward(0, instance, action, (10, 5))
    result2 = env.step(action)
    assert result2.reward == sigmoid_reward(1, instance, action, (10, 5))


def test_episode_is_deterministic() -> None:
    config = default_config("sigmoid", {"benchmark_params": {"instance_count": 1}})

    def run() -> list[float]:
        env = make_environment(config)
        env.reset()
        out = []
        done = False
        while not done:
            result = env.step((3, 1))
            out.append(result.reward)
            done = result.done
        return out

    assert run() == run()


def test_instance_validation() -> None:
    with pytest.raises(ConfigError):
        SigmoidInstance(instance_id="bad", shifts=(1.0, 2.0), slopes=(1.0,))
    with pytest.raises(ConfigError):
        SigmoidInstance(instance_id="empty", shifts=(), slopes=())


def test_cardinality_override_changes_action_space() -> None:
    config = default_config(
        "sigmoid",
        {"benchmark_params": {"cardinalities": [3, 3, 3], "instance_count": 2}},
    )
    assert config.action_space.cardinalities == (3, 3, 3)
    assert config.observation_space.dimension == 1 + 3 * 3
    env = make_environment(config)
    obs = env.reset()
    assert obs.shape == (10,)
    result = env.step((2, 1, 0))
    assert 0.0 <= result.reward <= 1.0


def test_mismatched_observation_dimension_rejected() -> None:
    config = default_config("sigmoid")
    data = config.to_json_dict()
    data["observation_space"] = {"kind": "continuous", "bounds": [[0.0, 1.0]] * 5}
    from ctrlbench.config import config_from_json_dict

    with pytest.raises(ConfigError, match="observation_space"):
        config_from_json_dict(data)
