"""Episodic environment base class and construction.

Environments follow a strict reset/step protocol: ``reset`` must be
called before ``step``, finished episodes refuse further steps, and
out-of-bounds actions raise instead of being clamped.  ``reset`` walks
the instance set in round-robin order, wrapping after the last
instance.

Randomness is split per episode: the stream for an episode is keyed by
(config seed, run seed, instance index, repetition), where the
repetition counts how many episodes this environment has already run on
that instance.  A (policy, seed, instance) cell therefore reproduces
identically whether executed alone or inside a full experiment grid.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import registry
from .config import BenchmarkConfig
from .errors import ActionError, ConfigError, StateError
from .instances import InstanceSet, resolve_instance_set
from .seeding import STREAM_DERIVED, STREAM_EPISODE, check_seed, stream


@dataclass
class StepResult:
    """One transition: observation, scalar reward, done flag, info dict."""

    observation: np.ndarray
    reward: float
    done: bool
    info: dict[str, Any] = field(default_factory=dict)


class Environment(abc.ABC):
    """Base class for all benchmark environments."""

    def __init__(self, config: BenchmarkConfig, instance_set: InstanceSet | None = None) -> None:
        self.config = config
        self.action_space = config.action_space
        self.observation_space = config.observation_space
        self.episode_cutoff = config.episode_cutoff
        self._instances = instance_set if instance_set is not None else resolve_instance_set(config)
        self._cursor = -1
        self._repetitions: dict[int, int] = {}
        self._run_seed = 0
        self._steps = 0
        self._needs_reset = True
        self._done = False
        self._rng: np.random.Generator | None = None

    # -- instance access -------------------------------------------------

    @property
    def instance_set(self) -> InstanceSet:
        return self._instances

    @property
    def instance_count(self) -> int:
        return len(self._instances)

    @property
    def instance_index(self) -> int:
        if self._cursor < 0:
            raise StateError("no current instance before the first reset()")
        return self._cursor

    @property
    def current_instance(self) -> Any:
        return self._instances[self.instance_index]

    @property
    def steps_taken(self) -> int:
        return self._steps

    def set_run_seed(self, run_seed: int) -> None:
        """Select the stochasticity stream family for subsequent episodes."""
        self._run_seed = check_seed(run_seed, field="run_seed")

    def instance_stream(self, *key: int | str) -> np.random.Generator:
        """Derived per-instance stream (constant across run seeds/episodes)."""
        return stream(self.config.seed, STREAM_DERIVED, self.instance_index, *key)

    # -- episode protocol -------------------------------------------------

    def reset(self) -> np.ndarray:
        """Advance to the next instance (round-robin) and start an episode."""
        self._cursor = (self._cursor + 1) % len(self._instances)
        repetition = self._repetitions.get(self._cursor, 0)
        self._repetitions[self._cursor] = repetition + 1
        self._rng = stream(
            self.config.seed, STREAM_EPISODE, self._run_seed, self._cursor, repetition
        )
        self._steps = 0
        self._done = False
        self._needs_reset = False
        return self._begin_episode(self._instances[self._cursor], self._rng)

    def step(self, action: Any) -> StepResult:
        """Apply one action; rejects out-of-bounds actions without clamping."""
        if self._needs_reset:
            raise StateError("step() called before reset()")
        if self._done:
            raise StateError("episode is finished; call reset()")
        if not self.action_space.contains(action):
            raise ActionError(
                f"action {action!r} is outside the action space "
                f"({self.action_space.kind}); actions are never clamped"
            )
        self._check_action(action)
        assert self._rng is not None
        observation, reward, done, info = self._transition(action, self._rng)
        self._steps += 1
        if self._steps >= self.episode_cutoff:
            done = True
        self._done = bool(done)
        return StepResult(observation=observation, reward=float(reward),
                          done=self._done, info=info)

    # -- hooks for subclasses ---------------------------------------------

    def _check_action(self, action: Any) -> None:
        """Extra benchmark-specific action validation (default: none)."""

    @abc.abstractmethod
    def _begin_episode(self, instance: Any, rng: np.random.Generator) -> np.ndarray:
        """Initialize the target algorithm on ``instance``; return first obs."""

    @abc.abstractmethod
    def _transition(
        self, action: Any, rng: np.random.Generator
    ) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        """Apply ``action`` for the current step; return (obs, reward, done, info)."""


def make_environment(config: BenchmarkConfig) -> Environment:
    """Construct the environment described by a validated config.

    The environment is returned un-reset; the first ``reset()`` starts on
    instance 0.  Missing instance files surface as FileNotFoundError with
    the offending path; schema problems as ConfigError naming the field.
    """
    definition = registry.get(config.benchmark_id)
    instance_set = resolve_instance_set(config)
    if len(instance_set) == 0:  # defensive; InstanceSet already forbids this
        raise ConfigError("instance set is empty")
    env = definition.env_class(config, instance_set)
    return env
