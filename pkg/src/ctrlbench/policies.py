"""Baseline policy zoo: static, random, repeat-random, optimal, CSA.

Policies are described by compact strings so they can live in config
files and on the command line:

    ``static:<action>``      fixed action; ``<action>`` is an integer,
                             comma-separated integers, or a float
    ``random:<seed>``        uniform over the action space each step
    ``repeat:<len>:<seed>``  resample every <len> steps (len in
                             {1, 10, 100, 1000}), hold in between
    ``optimal``              per-step best action (sigmoid and luby only)
    ``csa``                  cumulative step-size adaptation (cmaes only)

Policy randomness is seeded independently of environment randomness.
``begin_episode`` receives a context key (config seed, run seed,
instance index, repetition) that is combined with the policy's own seed,
so a policy replays the same action stream whenever the same episode
cell is executed, regardless of what the environment does.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from .config import BenchmarkConfig
from .environment import Environment
from .errors import ConfigError
from .seeding import STREAM_POLICY, stream
from .spaces import SpaceSpec

REPEAT_LENGTHS = (1, 10, 100, 1000)

POLICY_GRAMMAR = (
    '"static:<action>", "random:<seed>", "repeat:<len>:<seed>" '
    '(len in {1,10,100,1000}), "optimal", "csa"'
)


class Policy:
    """Base policy: bind to an environment once, then act per step.

    ``begin_episode`` is called before each episode with a context key;
    only stochastic policies use it.  ``act`` receives the current
    observation and the 0-based index of the step about to be taken.
    """

    policy_id: str = "policy"

    def bind(self, env: Environment) -> None:
        """Attach benchmark specifics; default is a no-op."""

    def begin_episode(self, context: tuple[int, ...] = ()) -> None:
        """Reset per-episode state; default is a no-op."""

    def act(self, observation: Any, step_index: int) -> Any:
        raise NotImplementedError


class StaticPolicy(Policy):
    """Plays one fixed action forever."""

    def __init__(self, action: Any) -> None:
        self.action = action
        self.policy_id = f"static:{format_action(action)}"

    def bind(self, env: Environment) -> None:
        space = env.action_space
        action = coerce_action(self.action, space)
        if not space.contains(action):
            raise ConfigError(
                f"static action {format_action(self.action)} is outside the "
                f"action space of benchmark {env.config.benchmark_id!r}"
            )
        self.action = action

    def act(self, observation: Any, step_index: int) -> Any:
        return self.action


class RandomPolicy(Policy):
    """Uniform sample from the action space at every step."""

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self.policy_id = f"random:{self.seed}"
        self._space: SpaceSpec | None = None
        self._rng = stream(self.seed, STREAM_POLICY)

    def bind(self, env: Environment) -> None:
        self._space = env.action_space

    def begin_episode(self, context: tuple[int, ...] = ()) -> None:
        self._rng = stream(self.seed, STREAM_POLICY, *context)

    def act(self, observation: Any, step_index: int) -> Any:
        if self._space is None:
            raise ConfigError("policy must be bound to an environment first")
        return self._space.sample(self._rng)


class RepeatRandomPolicy(Policy):
    """Samples like RandomPolicy but only when step_index % length == 0."""

    def __init__(self, length: int, seed: int) -> None:
        if length not in REPEAT_LENGTHS:
            raise ConfigError(
                f"repeat length must be one of {REPEAT_LENGTHS}, got {length}"
            )
        self.length = int(length)
        self.seed = int(seed)
        self.policy_id = f"repeat:{self.length}:{self.seed}"
        self._space: SpaceSpec | None = None
        self._rng = stream(self.seed, STREAM_POLICY)
        self._current: Any = None

    def bind(self, env: Environment) -> None:
        self._space = env.action_space

    def begin_episode(self, context: tuple[int, ...] = ()) -> None:
        self._rng = stream(self.seed, STREAM_POLICY, *context)
        self._current = None

    def act(self, observation: Any, step_index: int) -> Any:
        if self._space is None:
            raise ConfigError("policy must be bound to an environment first")
        if self._current is None or step_index % self.length == 0:
            self._current = self._space.sample(self._rng)
        return self._current


class OptimalSigmoidPolicy(Policy):
    """Per-dimension argmin of |curve - level| read off the observation."""

    policy_id = "optimal"

    def __init__(self) -> None:
        self._cutoff: int | None = None
        self._cards: tuple[int, ...] | None = None

    def bind(self, env: Environment) -> None:
        if env.config.benchmark_id != "sigmoid":
            raise ConfigError(
                f"optimal sigmoid policy bound to {env.config.benchmark_id!r}"
            )
        self._cutoff = env.config.episode_cutoff
        self._cards = env.action_space.cardinalities

    def act(self, observation: Any, step_index: int) -> tuple[int, ...]:
        if self._cutoff is None or self._cards is None:
            raise ConfigError("policy must be bound to an environment first")
        from .envs.sigmoid import SigmoidInstance, optimal_sigmoid_action

        dim = len(self._cards)
        t = int(round(self._cutoff - float(observation[0])))
        instance = SigmoidInstance(
            instance_id="from-observation",
            shifts=tuple(float(v) for v in observation[1 : 1 + dim]),
            slopes=tuple(float(v) for v in observation[1 + dim : 1 + 2 * dim]),
        )
        return optimal_sigmoid_action(t, instance, self._cards)


class OptimalLubyPolicy(Policy):
    """Plays log2 of the next-goal observation slot."""

    policy_id = "optimal"

    def __init__(self) -> None:
        self._n_actions: int | None = None

    def bind(self, env: Environment) -> None:
        if env.config.benchmark_id != "luby":
            raise ConfigError(
                f"optimal luby policy bound to {env.config.benchmark_id!r}"
            )
        self._n_actions = env.action_space.cardinalities[0]

    def act(self, observation: Any, step_index: int) -> int:
        if self._n_actions is None:
            raise ConfigError("policy must be bound to an environment first")
        goal = int(round(float(observation[7])))
        # goals above the playable range cannot be matched; play the top action
        return min(goal.bit_length() - 1, self._n_actions - 1)


class CsaPolicy(Policy):
    """Cumulative step-size adaptation driven by the sigma/path observation.

    The first action replays the environment's initial sigma (slot 0);
    afterwards sigma multiplies by exp((c_sigma/d_sigma)(||p_sigma||/E||N|| - 1)).
    """

    policy_id = "csa"

    def __init__(self) -> None:
        self._params = None

    def bind(self, env: Environment) -> None:
        if env.config.benchmark_id != "cmaes":
            raise ConfigError(f"csa policy bound to {env.config.benchmark_id!r}")
        from .envs.cmaes import CmaParameters

        dimension = int(env.config.benchmark_params.get("dimension", 10))
        self._params = CmaParameters.for_dimension(dimension)

    def act(self, observation: Any, step_index: int) -> float:
        if self._params is None:
            raise ConfigError("policy must be bound to an environment first")
        from .envs.cmaes import csa_next_sigma

        sigma = float(observation[0])
        if step_index == 0:
            return sigma
        return csa_next_sigma(sigma, float(observation[1]), self._params)


def format_action(action: Any) -> str:
    """Canonical text for a static action (ints, comma tuples, floats)."""
    if isinstance(action, tuple):
        return ",".join(str(int(a)) for a in action)
    if isinstance(action, (int, np.integer)) and not isinstance(action, bool):
        return str(int(action))
    return repr(float(action))


def coerce_action(action: Any, space: SpaceSpec) -> Any:
    """Fit a parsed static action to a space's expected shape and types."""
    if space.kind == "continuous":
        if space.dimension == 1 and isinstance(action, (int, float, np.floating)):
            return float(action)
        if isinstance(action, tuple) and len(action) == space.dimension:
            return tuple(float(a) for a in action)
        return action
    if space.kind == "discrete":
        if isinstance(action, float) and action.is_integer():
            return int(action)
        return action
    # multi_discrete
    if isinstance(action, (int, np.integer)) and space.dimension == 1:
        return (int(action),)
    return action


def parse_policy(text: str) -> Policy:
    """Parse one policy string; raises ConfigError quoting the grammar."""
    parts = text.strip().split(":")
    kind = parts[0]
    try:
        if kind == "static" and len(parts) == 2:
            return StaticPolicy(_parse_static_action(parts[1]))
        if kind == "random" and len(parts) == 2:
            return RandomPolicy(int(parts[1]))
        if kind == "repeat" and len(parts) == 3:
            return RepeatRandomPolicy(int(parts[1]), int(parts[2]))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(
            f"bad policy string {text!r}: {exc}; grammar: {POLICY_GRAMMAR}"
        ) from exc
    if text.strip() == "optimal":
        return _DeferredOptimal()
    if text.strip() == "csa":
        return CsaPolicy()
    raise ConfigError(f"unknown policy {text!r}; grammar: {POLICY_GRAMMAR}")


def _parse_static_action(token: str) -> Any:
    if token == "":
        raise ValueError("empty static action")
    if "," in token:
        return tuple(int(part) for part in token.split(","))
    try:
        return int(token)
    except ValueError:
        value = float(token)
        if not math.isfinite(value):
            raise ValueError(f"non-finite static action {token!r}")
        return value


class _DeferredOptimal(Policy):
    """Resolves to the benchmark-specific optimal policy when bound."""

    policy_id = "optimal"

    def __init__(self) -> None:
        self._inner: Policy | None = None

    def bind(self, env: Environment) -> None:
        benchmark = env.config.benchmark_id
        if benchmark == "sigmoid":
            self._inner = OptimalSigmoidPolicy()
        elif benchmark == "luby":
            self._inner = OptimalLubyPolicy()
        else:
            raise ConfigError(
                f"no optimal policy for benchmark {benchmark!r} "
                "(available for sigmoid and luby)"
            )
        self._inner.bind(env)

    def begin_episode(self, context: tuple[int, ...] = ()) -> None:
        if self._inner is not None:
            self._inner.begin_episode(context)

    def act(self, observation: Any, step_index: int) -> Any:
        if self._inner is None:
            raise ConfigError("policy must be bound to an environment first")
        return self._inner.act(observation, step_index)


def make_policy(text: str, config: BenchmarkConfig | None = None) -> Policy:
    """Parse a policy string, checking benchmark applicability if given."""
    policy = parse_policy(text)
    if config is not None:
        if policy.policy_id == "optimal" and config.benchmark_id not in ("sigmoid", "luby"):
            raise ConfigError(
                f"policy 'optimal' is not available for {config.benchmark_id!r}"
            )
        if policy.policy_id == "csa" and config.benchmark_id != "cmaes":
            raise ConfigError(
                f"policy 'csa' is not available for {config.benchmark_id!r}"
            )
    return policy


def static_grid(config: BenchmarkConfig, count: int = 50) -> list[StaticPolicy]:
    """Static policies covering the action space.

    Discrete spaces get one policy per action (the full product for
    multi-dimensional spaces).  Continuous 1-d spaces get `count` values
    at grid-cell midpoints, which keeps an open lower bound (sigma = 0)
    out of the grid.
    """
    space = config.action_space
    if space.kind == "discrete":
        return [StaticPolicy(a) for a in range(space.cardinalities[0])]
    if space.kind == "multi_discrete":
        import itertools

        ranges = [range(c) for c in space.cardinalities]
        return [StaticPolicy(tuple(combo)) for combo in itertools.product(*ranges)]
    if space.dimension != 1:
        raise ConfigError(
            "static_grid supports only 1-d continuous action spaces "
            f"(got dimension {space.dimension})"
        )
    if count < 2:
        raise ConfigError(f"continuous grids need count >= 2, got {count}")
    low, high = space.bounds[0]
    span = (high - low) / count
    return [StaticPolicy(low + (i + 0.5) * span) for i in range(count)]


def applicable_policy_ids(config: BenchmarkConfig) -> list[str]:
    """Baseline policy strings that are valid for a benchmark."""
    ids = ["random:<seed>", "repeat:<len>:<seed>", "static:<action>"]
    if config.benchmark_id in ("sigmoid", "luby"):
        ids.append("optimal")
    if config.benchmark_id == "cmaes":
        ids.append("csa")
    return ids


__all__ = [
    "POLICY_GRAMMAR",
    "REPEAT_LENGTHS",
    "Policy",
    "StaticPolicy",
    "RandomPolicy",
    "RepeatRandomPolicy",
    "OptimalSigmoidPolicy",
    "OptimalLubyPolicy",
    "CsaPolicy",
    "parse_policy",
    "make_policy",
    "static_grid",
    "applicable_policy_ids",
]
