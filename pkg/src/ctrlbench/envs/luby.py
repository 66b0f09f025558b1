"""Restart-sequence benchmark.

The controller must reproduce the classic restart sequence
1, 1, 2, 1, 1, 2, 4, 1, ... one value per step.  ``luby_value(t)`` for a
1-based position t is ``2**(k-1)`` when ``t == 2**k - 1``, otherwise
``luby_value(t - 2**(k-1) + 1)`` for the unique k with
``2**(k-1) <= t < 2**k - 1``.  Actions are exponents: action a plays the
value ``2**a``.  A correct value earns reward 0, anything else -1, so
the best possible episode return is 0.

Instances shift the starting position (``start_shift``) and can add an
accumulating Gaussian drift to the position (``noise_scale``; the drift
is rounded to the nearest integer and the position clamped to >= 1).
The per-step draw is added after the step's reward is computed, so the
"next goal" observation slot is exact even under noise.  The shipped
default sets use noise_scale 0.

Observation layout (dimension 9):
    [timestep, last 5 action indices (most recent first, -1 padding),
     previous reward, next goal value, episode cutoff]

Instance CSV columns: ``instance_id, start_shift, noise_scale``.
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
from ..instances import fmt_float, parse_float, parse_int
from ..registry import BenchmarkDefinition, ParamSpec

DEFAULT_SEQUENCE_LENGTH = 64
# Shifts above 62 make position 127 (value 64) reachable, which no action
# of the default 6-action space can play; the generator stays below that.
DEFAULT_MAX_START_SHIFT = 62
HISTORY_LENGTH = 5

_TABLE: list[int] = [0]  # 1-based; index 0 unused


def luby_value(t: int) -> int:
    """Value of the restart sequence at 1-based position t (memoized)."""
    if t < 1:
        raise ValueError(f"positions are 1-based, got {t}")
    while len(_TABLE) <= t:
        pos = len(_TABLE)
        k = pos.bit_length()
        if pos == (1 << k) - 1:
            _TABLE.append(1 << (k - 1))
        else:
            # unique k with 2**(k-1) <= pos < 2**k - 1
            _TABLE.append(_TABLE[pos - (1 << (k - 1)) + 1])
    return _TABLE[t]


def action_count(sequence_length: int) -> int:
    """Number of distinct sequence values within the first ``sequence_length``."""
    return int(math.floor(math.log2(sequence_length + 1)))


@dataclass(frozen=True)
class LubyInstance:
    """Start shift plus accumulating position-noise scale."""

    instance_id: str
    start_shift: int
    noise_scale: float

    def __post_init__(self) -> None:
        if self.start_shift < 0:
            raise ConfigError(f"instance {self.instance_id}: start_shift must be >= 0")
        if self.noise_scale < 0:
            raise ConfigError(f"instance {self.instance_id}: noise_scale must be >= 0")


class LubyEnv(Environment):
    """Sequence reproduction with optional position drift."""

    def __init__(self, config: BenchmarkConfig, instance_set=None) -> None:
        super().__init__(config, instance_set)
        if self.action_space.kind != "discrete":
            raise ConfigError("luby requires a discrete action space", field="action_space")
        self._sequence_length = int(
            config.benchmark_params.get("sequence_length", DEFAULT_SEQUENCE_LENGTH)
        )
        self._instance: LubyInstance | None = None
        self._history: list[float] = []
        self._prev_reward = 0.0
        self._drift = 0.0

    def _position(self, step_1based: int) -> int:
        assert self._instance is not None
        return max(1, step_1based + self._instance.start_shift + round(self._drift))

    def _begin_episode(self, instance: LubyInstance, rng: np.random.Generator) -> np.ndarray:
        if instance.start_shift >= self._sequence_length:
            raise ConfigError(
                f"instance {instance.instance_id}: start_shift must be < "
                f"sequence length {self._sequence_length}"
            )
        self._instance = instance
        self._history = [-1.0] * HISTORY_LENGTH
        self._prev_reward = 0.0
        self._drift = 0.0
        return self._observation()

    def _transition(
        self, action: Any, rng: np.random.Generator
    ) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        assert self._instance is not None
        step = self._steps + 1  # 1-based position of the current step
        target = luby_value(self._position(step))
        played = 1 << int(action)
        reward = 0.0 if played == target else -1.0
        if self._instance.noise_scale > 0.0:
            self._drift += float(rng.normal(0.0, self._instance.noise_scale))
        self._history.pop()
        self._history.insert(0, float(int(action)))
        self._prev_reward = reward
        return self._observation(next_step=step + 1), reward, False, {"target": target}

    def _observation(self, next_step: int = 1) -> np.ndarray:
        obs = np.empty(9)
        obs[0] = next_step - 1  # completed steps
        obs[1:6] = self._history
        obs[6] = self._prev_reward
        obs[7] = luby_value(self._position(next_step))
        obs[8] = self.episode_cutoff
        return obs


class LubyCodec:
    """CSV codec and generator for luby instances."""

    COLUMNS = ["instance_id", "start_shift", "noise_scale"]

    def columns(self, instances) -> list[str]:
        return list(self.COLUMNS)

    def encode_row(self, instance: LubyInstance, columns: list[str]) -> list[str]:
        return [instance.instance_id, str(instance.start_shift), fmt_float(instance.noise_scale)]

    def decode_row(self, row: dict[str, str], *, line: int, path: str) -> LubyInstance:
        for column in self.COLUMNS:
            if column not in row:
                raise ParseError(f"missing column {column!r}", path=path, line=1)
        return LubyInstance(
            instance_id=row["instance_id"],
            start_shift=parse_int(row["start_shift"], column="start_shift", line=line, path=path),
            noise_scale=parse_float(row["noise_scale"], column="noise_scale", line=line, path=path),
        )

    def generate(self, rng: np.random.Generator, index: int, split: str,
                 params: dict[str, Any]) -> LubyInstance:
        max_shift = int(params.get("max_start_shift", DEFAULT_MAX_START_SHIFT))
        noise = float(params.get("noise_scale", 0.0))
        shift = int(rng.integers(0, max_shift + 1))
        return LubyInstance(
            instance_id=f"luby_{split}_{index:03d}", start_shift=shift, noise_scale=noise
        )


def _make_default_config(overrides: dict[str, Any]) -> BenchmarkConfig:
    params = dict(overrides.pop("benchmark_params", {}) or {})
    length = int(params.get("sequence_length", DEFAULT_SEQUENCE_LENGTH))
    # Largest shift that keeps every reachable goal playable: positions run
    # to length + shift, and values above 2^(n_actions - 1) first appear at
    # position 2^(n_actions + 1) - 1.  For the default length 64 this is 62.
    n_actions = action_count(length)
    playable_limit = (1 << (n_actions + 1)) - 2 - length
    params.setdefault("max_start_shift", max(0, min(length - 1, playable_limit)))
    cutoff = overrides.get("episode_cutoff", length)
    inf = float("inf")
    obs_bounds = (
        [(0.0, float(cutoff))]
        + [(-1.0, float(n_actions - 1))] * HISTORY_LENGTH
        + [(-1.0, 0.0), (1.0, inf), (0.0, inf)]
    )
    data = {
        "format_version": FORMAT_VERSION,
        "benchmark_id": "luby",
        "seed": 0,
        "episode_cutoff": cutoff,
        "reward_quality": 1,
        "action_space": {"kind": "discrete", "cardinalities": [n_actions]},
        "observation_space": {"kind": "continuous", "bounds": [list(b) for b in obs_bounds]},
        "instance_source": {"kind": "generator", "split": "train"},
        "benchmark_params": {**{"sequence_length": length}, **params},
    }
    data.update(overrides)
    return config_from_json_dict(data)


def _validate_config(config: BenchmarkConfig) -> None:
    if config.observation_space.dimension != 9:
        raise ConfigError("luby observations have dimension 9", field="observation_space")


_PARAM_SCHEMA = {
    "sequence_length": ParamSpec(type=int, default=DEFAULT_SEQUENCE_LENGTH,
                                 check=lambda v: v >= 1),
    "max_start_shift": ParamSpec(type=int, default=DEFAULT_MAX_START_SHIFT,
                                 check=lambda v: v >= 0),
    "noise_scale": ParamSpec(type=float, default=0.0, check=lambda v: v >= 0),
    "instance_count": ParamSpec(type=int, default=100, check=lambda v: v >= 1),
}

registry.register(
    BenchmarkDefinition(
        benchmark_id="luby",
        make_default_config=_make_default_config,
        env_class=LubyEnv,
        codec=LubyCodec(),
        param_schema=_PARAM_SCHEMA,
        deterministic=True,
        default_reward_quality=1,
        validate_config=_validate_config,
    )
)
