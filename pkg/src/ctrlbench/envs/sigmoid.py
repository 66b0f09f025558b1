"""Sigmoid tracking benchmark.

The controller tracks one logistic curve per action dimension.  At step
t (starting from 0) of an episode on instance ``(shifts, slopes)`` the
curve value in dimension d is ``1 / (1 + exp(-slope_d * (t - shift_d)))``
and the per-dimension payoff for action ``a_d`` out of ``n_d`` levels is
``1 - |curve_d(t) - a_d / (n_d - 1)|``.  The step reward is the product
over dimensions, so it lies in [0, 1] and the episode return is at most
the cutoff.  The benchmark is deterministic given the instance.

Observation layout (dimension 1 + 3 * D):
    [remaining steps, shift_1..shift_D, slope_1..slope_D,
     previous action_1..action_D]
with previous actions set to -1 before the first step.

Instance CSV columns: ``instance_id, shift_1..shift_D, slope_1..slope_D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .. import registry
from ..config import FORMAT_VERSION, BenchmarkConfig, config_from_json_dict
from ..environment import Environment
from ..errors import ConfigError, ParseError
from ..instances import fmt_float, parse_float
from ..registry import BenchmarkDefinition, ParamSpec

DEFAULT_CARDINALITIES = (10, 5)
DEFAULT_CUTOFF = 10


@dataclass(frozen=True)
class SigmoidInstance:
    """One tracking task: a shift and a signed slope per dimension."""

    instance_id: str
    shifts: tuple[float, ...]
    slopes: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.shifts) != len(self.slopes):
            raise ConfigError(
                f"instance {self.instance_id}: {len(self.shifts)} shifts vs "
                f"{len(self.slopes)} slopes"
            )
        if not self.shifts:
            raise ConfigError(f"instance {self.instance_id}: needs at least one dimension")

    @property
    def dimension(self) -> int:
        return len(self.shifts)


def sigmoid_value(t: float, shift: float, slope: float) -> float:
    """Logistic curve value at time t; safe against exp overflow."""
    arg = -slope * (t - shift)
    if arg > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(arg))


def sigmoid_reward(
    t: int, instance: SigmoidInstance, action: tuple[int, ...], cardinalities: tuple[int, ...]
) -> float:
    """Product over dimensions of 1 - |curve - normalized action level|."""
    reward = 1.0
    for a, shift, slope, card in zip(action, instance.shifts, instance.slopes, cardinalities):
        target = sigmoid_value(t, shift, slope)
        level = a / max(card - 1, 1)
        reward *= 1.0 - abs(target - level)
    return reward


def optimal_sigmoid_action(
    t: int, instance: SigmoidInstance, cardinalities: tuple[int, ...]
) -> tuple[int, ...]:
    """Per-dimension argmin of |curve - level|; ties go to the smaller index."""
    action = []
    for shift, slope, card in zip(instance.shifts, instance.slopes, cardinalities):
        target = sigmoid_value(t, shift, slope)
        denom = max(card - 1, 1)
        best, best_dist = 0, float("inf")
        for level in range(card):
            dist = abs(target - level / denom)
            if dist < best_dist:
                best, best_dist = level, dist
        action.append(best)
    return tuple(action)


class SigmoidEnv(Environment):
    """Deterministic multi-dimensional sigmoid tracking."""

    def __init__(self, config: BenchmarkConfig, instance_set=None) -> None:
        super().__init__(config, instance_set)
        if self.action_space.kind not in ("discrete", "multi_discrete"):
            raise ConfigError("sigmoid requires a discrete action space", field="action_space")
        self._cards: tuple[int, ...] = tuple(self.action_space.cardinalities or ())
        self._instance: SigmoidInstance | None = None
        self._prev_action: tuple[int, ...] | None = None

    def _begin_episode(self, instance: SigmoidInstance, rng: np.random.Generator) -> np.ndarray:
        if instance.dimension != len(self._cards):
            raise ConfigError(
                f"instance {instance.instance_id} has {instance.dimension} dimensions, "
                f"action space has {len(self._cards)}"
            )
        self._instance = instance
        self._prev_action = None
        return self._observation()

    def _transition(
        self, action: Any, rng: np.random.Generator
    ) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        assert self._instance is not None
        act = (int(action),) if self.action_space.kind == "discrete" else tuple(
            int(a) for a in action
        )
        reward = sigmoid_reward(self._steps, self._instance, act, self._cards)
        self._prev_action = act
        # base class increments _steps after this returns
        return self._observation(next_step=self._steps + 1), reward, False, {}

    def _observation(self, next_step: int = 0) -> np.ndarray:
        assert self._instance is not None
        d = len(self._cards)
        obs = np.empty(1 + 3 * d)
        obs[0] = self.episode_cutoff - next_step
        obs[1 : 1 + d] = self._instance.shifts
        obs[1 + d : 1 + 2 * d] = self._instance.slopes
        obs[1 + 2 * d :] = self._prev_action if self._prev_action is not None else (-1.0,) * d
        return obs


class SigmoidCodec:
    """CSV codec and generator for sigmoid instances."""

    def columns(self, instances) -> list[str]:
        d = instances[0].dimension if instances else 2
        return (
            ["instance_id"]
            + [f"shift_{i}" for i in range(1, d + 1)]
            + [f"slope_{i}" for i in range(1, d + 1)]
        )

    def encode_row(self, instance: SigmoidInstance, columns: list[str]) -> list[str]:
        return (
            [instance.instance_id]
            + [fmt_float(s) for s in instance.shifts]
            + [fmt_float(s) for s in instance.slopes]
        )

    def decode_row(self, row: dict[str, str], *, line: int, path: str) -> SigmoidInstance:
        if "instance_id" not in row:
            raise ParseError("missing instance_id column", path=path, line=1)
        shift_cols = sorted(
            (c for c in row if c.startswith("shift_")), key=lambda c: int(c.split("_")[1])
        )
        slope_cols = sorted(
            (c for c in row if c.startswith("slope_")), key=lambda c: int(c.split("_")[1])
        )
        if not shift_cols or len(shift_cols) != len(slope_cols):
            raise ParseError("need matching shift_i/slope_i columns", path=path, line=1)
        shifts = tuple(
            parse_float(row[c], column=c, line=line, path=path) for c in shift_cols
        )
        slopes = tuple(
            parse_float(row[c], column=c, line=line, path=path) for c in slope_cols
        )
        return SigmoidInstance(instance_id=row["instance_id"], shifts=shifts, slopes=slopes)

    def generate(self, rng: np.random.Generator, index: int, split: str,
                 params: dict[str, Any]) -> SigmoidInstance:
        d = len(params.get("cardinalities", DEFAULT_CARDINALITIES))
        shift_low = float(params.get("shift_low", 0.0))
        shift_high = float(params.get("shift_high", float(DEFAULT_CUTOFF)))
        slope_min = float(params.get("slope_min", 0.5))
        slope_max = float(params.get("slope_max", 4.0))
        shifts = tuple(float(rng.uniform(shift_low, shift_high)) for _ in range(d))
        slopes = tuple(
            float(rng.uniform(slope_min, slope_max)) * (1.0 if rng.integers(2) else -1.0)
            for _ in range(d)
        )
        return SigmoidInstance(
            instance_id=f"sigmoid_{split}_{index:03d}", shifts=shifts, slopes=slopes
        )


def _make_default_config(overrides: dict[str, Any]) -> BenchmarkConfig:
    params = dict(overrides.pop("benchmark_params", {}) or {})
    cards = tuple(params.get("cardinalities", DEFAULT_CARDINALITIES))
    cutoff = overrides.get("episode_cutoff", DEFAULT_CUTOFF)
    d = len(cards)
    inf = float("inf")
    obs_bounds = (
        [(0.0, float(cutoff))]
        + [(-inf, inf)] * d
        + [(-inf, inf)] * d
        + [(-1.0, float(c - 1)) for c in cards]
    )
    data = {
        "format_version": FORMAT_VERSION,
        "benchmark_id": "sigmoid",
        "seed": 0,
        "episode_cutoff": cutoff,
        "reward_quality": 2,
        "action_space": {"kind": "multi_discrete", "cardinalities": list(cards)},
        "observation_space": {"kind": "continuous", "bounds": [list(b) for b in obs_bounds]},
        "instance_source": {"kind": "generator", "split": "train"},
        "benchmark_params": {**{"cardinalities": list(cards)}, **params},
    }
    data.update(overrides)
    return config_from_json_dict(data)


def _validate_config(config: BenchmarkConfig) -> None:
    cards = config.benchmark_params.get("cardinalities")
    if cards is not None and tuple(cards) != tuple(config.action_space.cardinalities or ()):
        raise ConfigError(
            "benchmark_params.cardinalities must match the action space",
            field="benchmark_params.cardinalities",
        )
    d = config.action_space.dimension
    expected = 1 + 3 * d
    if config.observation_space.dimension != expected:
        raise ConfigError(
            f"observation_space dimension must be {expected} for {d} action dimensions",
            field="observation_space",
        )


_PARAM_SCHEMA = {
    "cardinalities": ParamSpec(
        type=list, default=list(DEFAULT_CARDINALITIES),
        check=lambda v: len(v) >= 1 and all(isinstance(c, int) and c >= 1 for c in v),
        describe="list of per-dimension action counts",
    ),
    "shift_low": ParamSpec(type=float, default=0.0),
    "shift_high": ParamSpec(type=float, default=float(DEFAULT_CUTOFF)),
    "slope_min": ParamSpec(type=float, default=0.5, check=lambda v: v > 0),
    "slope_max": ParamSpec(type=float, default=4.0, check=lambda v: v > 0),
    "instance_count": ParamSpec(type=int, default=100, check=lambda v: v >= 1),
}

registry.register(
    BenchmarkDefinition(
        benchmark_id="sigmoid",
        make_default_config=_make_default_config,
        env_class=SigmoidEnv,
        codec=SigmoidCodec(),
        param_schema=_PARAM_SCHEMA,
        deterministic=True,
        default_reward_quality=2,
        validate_config=_validate_config,
    )
)
