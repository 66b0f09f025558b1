"""Step-size control benchmark around a covariance-adapting evolution strategy.

The environment runs one generation of a (mu/mu_w, lambda) evolution
strategy per control step.  Everything about the strategy is standard
(weighted recombination, both evolution paths, rank-one plus rank-mu
covariance updates) EXCEPT the global step size sigma, which is never
adapted internally: each action sets sigma for the next generation,
with valid actions in (0, 10].  The usual cumulative step-size rule is
exposed separately (:func:`csa_next_sigma`) so it can be run as a
policy against the same environment.

Reward is the negated best objective value of the generation (the raw
value is reported in ``info``).  Episodes end after ``episode_cutoff``
generations or once the best value so far is within 1e-8 of the
instance's ``f_offset``.

Observation layout (dimension 123):
    [sigma, ||p_sigma||, population size,
     best-fitness history (40), fitness-delta history (40),
     sigma history (40)]
histories are newest-first and zero-padded before 40 generations.

Instance CSV columns: ``instance_id, function_class, dimension,
optimum_shift_1..n, rotation_seed (empty = none), f_offset``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .. import registry
from ..config import FORMAT_VERSION, BenchmarkConfig, config_from_json_dict
from ..environment import Environment
from ..errors import ActionError, ConfigError, ParseError
from ..instances import fmt_float, parse_float, parse_int
from ..registry import BenchmarkDefinition, ParamSpec
from .functions import (
    FUNCTION_CLASSES,
    _linear_slope,
    check_function_class,
    make_base,
    make_rotation,
)

DEFAULT_DIMENSION = 10
DEFAULT_CUTOFF = 1000
SIGMA_MAX = 10.0
TARGET_PRECISION = 1e-8
HISTORY = 40
OBSERVATION_DIM = 3 + 3 * HISTORY


def population_size(dimension: int) -> int:
    """Default population size: 4 + floor(3 ln n)."""
    return 4 + int(math.floor(3.0 * math.log(dimension)))


def expected_norm(dimension: int) -> float:
    """Expected norm of an n-dimensional standard normal vector."""
    n = dimension
    return math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))


@dataclass(frozen=True)
class CmaParameters:
    """Strategy constants for one problem dimension."""

    dimension: int
    lam: int
    mu: int
    weights: np.ndarray
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    chi_n: float

    @classmethod
    def for_dimension(cls, dimension: int, lam: int | None = None) -> "CmaParameters":
        if dimension < 2:
            raise ConfigError("dimension must be >= 2", field="dimension")
        n = dimension
        lam = population_size(n) if lam is None else int(lam)
        if lam < 2:
            raise ConfigError("population size must be >= 2")
        mu = lam // 2
        raw = np.log((lam + 1) / 2.0) - np.log(np.arange(1, mu + 1))
        weights = raw / raw.sum()
        mu_eff = float(1.0 / (weights**2).sum())
        c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0)
        d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma
        c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n)
        c_1 = 2.0 / ((n + 1.3) ** 2 + mu_eff)
        c_mu = min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) ** 2 + mu_eff))
        return cls(
            dimension=n, lam=lam, mu=mu, weights=weights, mu_eff=mu_eff,
            c_sigma=c_sigma, d_sigma=d_sigma, c_c=c_c, c_1=c_1, c_mu=c_mu,
            chi_n=expected_norm(n),
        )


def csa_next_sigma(sigma: float, p_norm: float, params: CmaParameters) -> float:
    """Cumulative step-size rule, clamped into the valid action range (0, 10]."""
    value = sigma * math.exp(
        (params.c_sigma / params.d_sigma) * (p_norm / params.chi_n - 1.0)
    )
    return max(min(value, SIGMA_MAX), 1e-300)


class CmaEvolution:
    """Mutable strategy state; one :meth:`run_generation` call per action."""

    def __init__(self, params: CmaParameters,
                 objective: Callable[[np.ndarray], np.ndarray],
                 initial_mean: np.ndarray, initial_sigma: float) -> None:
        n = params.dimension
        self.params = params
        self.objective = objective
        self.mean = np.asarray(initial_mean, dtype=float).copy()
        if self.mean.shape != (n,):
            raise ConfigError(f"initial mean must have shape ({n},)")
        self.sigma = float(initial_sigma)
        self.cov = np.eye(n)
        self.p_sigma = np.zeros(n)
        self.p_c = np.zeros(n)
        self.generation = 0
        self.best_so_far = math.inf
        self._prev_gen_best = math.inf
        self.best_history = np.zeros(HISTORY)
        self.delta_history = np.zeros(HISTORY)
        self.sigma_history = np.zeros(HISTORY)
        # eigen factors of cov (identity at start)
        self._transform = np.eye(n)       # A with A A^T = C, for sampling
        self._inv_sqrt = np.eye(n)        # C^(-1/2), for the sigma path
        self._p_norm = 0.0

    @property
    def p_sigma_norm(self) -> float:
        return self._p_norm

    def run_generation(self, sigma: float, rng: np.random.Generator) -> float:
        """Sample, rank, and update with the externally chosen step size."""
        if not (0.0 < sigma <= SIGMA_MAX):
            raise ActionError(f"sigma must be in (0, {SIGMA_MAX}], got {sigma}")
        p = self.params
        n = p.dimension
        z = rng.standard_normal((p.lam, n))
        y = z @ self._transform.T
        x = self.mean + sigma * y
        fitness = self.objective(x)
        order = np.argsort(fitness, kind="stable")
        best_index = int(order[0])
        gen_best = float(fitness[best_index])
        selected = y[order[: p.mu]]

        y_w = p.weights @ selected
        self.mean = self.mean + sigma * y_w
        self.generation += 1

        self.p_sigma = (1.0 - p.c_sigma) * self.p_sigma + math.sqrt(
            p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff
        ) * (self._inv_sqrt @ y_w)
        p_norm = float(math.sqrt(float(self.p_sigma @ self.p_sigma)))
        self._p_norm = p_norm
        denom = math.sqrt(1.0 - (1.0 - p.c_sigma) ** (2.0 * self.generation))
        h_sigma = 1.0 if p_norm / denom < (1.4 + 2.0 / (n + 1.0)) * p.chi_n else 0.0

        self.p_c = (1.0 - p.c_c) * self.p_c + h_sigma * math.sqrt(
            p.c_c * (2.0 - p.c_c) * p.mu_eff
        ) * y_w

        rank_mu = (p.weights[:, None] * selected).T @ selected
        decay = 1.0 - p.c_1 - p.c_mu + (1.0 - h_sigma) * p.c_1 * p.c_c * (2.0 - p.c_c)
        cov = self.cov
        cov *= decay
        rank_one = self.p_c[:, None] * self.p_c[None, :]
        rank_one *= p.c_1
        cov += rank_one
        rank_mu *= p.c_mu
        cov += rank_mu
        self._refresh_factors()

        # histories, newest first
        self.best_history[1:] = self.best_history[:-1]
        self.best_history[0] = gen_best
        delta = 0.0 if self.generation == 1 else gen_best - self._prev_gen_best
        self.delta_history[1:] = self.delta_history[:-1]
        self.delta_history[0] = delta
        self.sigma_history[1:] = self.sigma_history[:-1]
        self.sigma_history[0] = sigma

        self._prev_gen_best = gen_best
        self.sigma = sigma
        if gen_best < self.best_so_far:
            self.best_so_far = gen_best
        return gen_best

    def _refresh_factors(self) -> None:
        """Symmetrize, floor eigenvalues, and cache the matrix roots."""
        cov = self.cov
        cov += cov.T.copy()
        cov *= 0.5
        values, vectors = np.linalg.eigh(cov)
        # eigenvalue sum equals the trace of the symmetrized matrix
        floor = max(1e-14 * float(values.sum()) / self.params.dimension, 1e-300)
        if values[0] < floor:
            values = np.maximum(values, floor)
            self.cov = (vectors * values) @ vectors.T
        roots = np.sqrt(values)
        self._transform = vectors * roots
        self._inv_sqrt = (vectors / roots) @ vectors.T


@dataclass(frozen=True)
class FunctionInstance:
    """One objective: class, dimension, shift, optional rotation, offset."""

    instance_id: str
    function_class: str
    dimension: int
    optimum_shift: tuple[float, ...]
    rotation_seed: int | None
    f_offset: float

    def __post_init__(self) -> None:
        check_function_class(self.function_class)
        if self.dimension < 2:
            raise ConfigError(f"instance {self.instance_id}: dimension must be >= 2")
        if len(self.optimum_shift) != self.dimension:
            raise ConfigError(
                f"instance {self.instance_id}: expected {self.dimension} shift "
                f"coordinates, got {len(self.optimum_shift)}"
            )


def make_objective(instance: FunctionInstance) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized objective for an instance (no per-call validation)."""
    shift = np.asarray(instance.optimum_shift, dtype=float)
    offset = instance.f_offset
    if instance.function_class == "linear_slope":
        def objective(points: np.ndarray) -> np.ndarray:
            return offset + _linear_slope(points, shift)
        return objective
    base = make_base(instance.function_class, instance.dimension)
    rotation = (
        make_rotation(instance.dimension, instance.rotation_seed)
        if instance.rotation_seed is not None else None
    )
    if rotation is None:
        def objective(points: np.ndarray) -> np.ndarray:
            return offset + base(points - shift)
    else:
        rot_t = rotation.T
        def objective(points: np.ndarray) -> np.ndarray:
            return offset + base((points - shift) @ rot_t)
    return objective


class CmaEsEnv(Environment):
    """External step-size control of the evolution strategy."""

    def __init__(self, config: BenchmarkConfig, instance_set=None) -> None:
        super().__init__(config, instance_set)
        if self.action_space.kind != "continuous" or self.action_space.dimension != 1:
            raise ConfigError("cmaes requires a 1-d continuous action space",
                              field="action_space")
        self._evolution: CmaEvolution | None = None
        self._instance: FunctionInstance | None = None

    def _check_action(self, action: Any) -> None:
        if float(action) <= 0.0:
            raise ActionError(
                f"sigma action must be in (0, {SIGMA_MAX}], got {float(action)}"
            )

    @property
    def evolution(self) -> CmaEvolution:
        if self._evolution is None:
            raise ConfigError("environment must be reset first")
        return self._evolution

    def _begin_episode(self, instance: FunctionInstance, rng: np.random.Generator) -> np.ndarray:
        params = CmaParameters.for_dimension(instance.dimension)
        # start point is a fixed property of the instance, not of the episode
        x0 = self.instance_stream("x0").uniform(-4.0, 4.0, instance.dimension)
        self._instance = instance
        self._evolution = CmaEvolution(
            params, make_objective(instance), x0, initial_sigma=0.5
        )
        return self._observation()

    def _transition(
        self, action: Any, rng: np.random.Generator
    ) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        assert self._evolution is not None and self._instance is not None
        gen_best = self._evolution.run_generation(float(action), rng)
        done = (self._evolution.best_so_far - self._instance.f_offset) <= TARGET_PRECISION
        info = {
            "generation_best_fitness": gen_best,
            "best_so_far": self._evolution.best_so_far,
        }
        return self._observation(), -gen_best, done, info

    def _observation(self) -> np.ndarray:
        ev = self._evolution
        assert ev is not None
        obs = np.empty(OBSERVATION_DIM)
        obs[0] = ev.sigma
        obs[1] = ev.p_sigma_norm
        obs[2] = ev.params.lam
        obs[3 : 3 + HISTORY] = ev.best_history
        obs[3 + HISTORY : 3 + 2 * HISTORY] = ev.delta_history
        obs[3 + 2 * HISTORY :] = ev.sigma_history
        return obs


class CmaCodec:
    """CSV codec and generator for objective-function instances."""

    def columns(self, instances) -> list[str]:
        d = max((inst.dimension for inst in instances), default=DEFAULT_DIMENSION)
        return (
            ["instance_id", "function_class", "dimension"]
            + [f"optimum_shift_{i}" for i in range(1, d + 1)]
            + ["rotation_seed", "f_offset"]
        )

    def encode_row(self, instance: FunctionInstance, columns: list[str]) -> list[str]:
        n_shift_cols = len(columns) - 5
        shifts = [fmt_float(s) for s in instance.optimum_shift]
        shifts += [""] * (n_shift_cols - len(shifts))
        rotation = "" if instance.rotation_seed is None else str(instance.rotation_seed)
        return (
            [instance.instance_id, instance.function_class, str(instance.dimension)]
            + shifts
            + [rotation, fmt_float(instance.f_offset)]
        )

    def decode_row(self, row: dict[str, str], *, line: int, path: str) -> FunctionInstance:
        for column in ("instance_id", "function_class", "dimension", "rotation_seed", "f_offset"):
            if column not in row:
                raise ParseError(f"missing column {column!r}", path=path, line=1)
        dimension = parse_int(row["dimension"], column="dimension", line=line, path=path)
        shifts = []
        for i in range(1, dimension + 1):
            column = f"optimum_shift_{i}"
            if column not in row or row[column] == "":
                raise ParseError(
                    f"missing shift column {column!r} for dimension {dimension}",
                    path=path, line=line,
                )
            shifts.append(parse_float(row[column], column=column, line=line, path=path))
        rotation_raw = row["rotation_seed"].strip()
        rotation_seed = None if rotation_raw == "" else parse_int(
            rotation_raw, column="rotation_seed", line=line, path=path
        )
        try:
            return FunctionInstance(
                instance_id=row["instance_id"],
                function_class=row["function_class"],
                dimension=dimension,
                optimum_shift=tuple(shifts),
                rotation_seed=rotation_seed,
                f_offset=parse_float(row["f_offset"], column="f_offset", line=line, path=path),
            )
        except ConfigError as exc:
            raise ParseError(str(exc), path=path, line=line) from None

    def generate(self, rng: np.random.Generator, index: int, split: str,
                 params: dict[str, Any]) -> FunctionInstance:
        dimension = int(params.get("dimension", DEFAULT_DIMENSION))
        function_class = FUNCTION_CLASSES[index % len(FUNCTION_CLASSES)]
        if function_class == "linear_slope":
            # the freeze rule attains its minimum only at the +-5 corners
            shift = tuple(
                5.0 if rng.integers(2) else -5.0 for _ in range(dimension)
            )
        else:
            shift = tuple(float(v) for v in rng.uniform(-4.0, 4.0, dimension))
        return FunctionInstance(
            instance_id=f"cmaes_{split}_{index:03d}",
            function_class=function_class,
            dimension=dimension,
            optimum_shift=shift,
            rotation_seed=None,
            f_offset=0.0,
        )


def _make_default_config(overrides: dict[str, Any]) -> BenchmarkConfig:
    params = dict(overrides.pop("benchmark_params", {}) or {})
    inf = float("inf")
    obs_bounds = (
        [[0.0, SIGMA_MAX], [0.0, inf], [1.0, inf]]
        + [[-inf, inf]] * HISTORY
        + [[-inf, inf]] * HISTORY
        + [[0.0, SIGMA_MAX]] * HISTORY
    )
    data = {
        "format_version": FORMAT_VERSION,
        "benchmark_id": "cmaes",
        "seed": 0,
        "episode_cutoff": DEFAULT_CUTOFF,
        "reward_quality": 2,
        "action_space": {"kind": "continuous", "bounds": [[0.0, SIGMA_MAX]]},
        "observation_space": {"kind": "continuous", "bounds": obs_bounds},
        "instance_source": {"kind": "generator", "split": "train"},
        "benchmark_params": params,
    }
    data.update(overrides)
    return config_from_json_dict(data)


def _validate_config(config: BenchmarkConfig) -> None:
    if config.observation_space.dimension != OBSERVATION_DIM:
        raise ConfigError(
            f"cmaes observations have dimension {OBSERVATION_DIM}",
            field="observation_space",
        )


_PARAM_SCHEMA = {
    "dimension": ParamSpec(type=int, default=DEFAULT_DIMENSION, check=lambda v: v >= 2),
    "instance_count": ParamSpec(type=int, default=100, check=lambda v: v >= 1),
}

registry.register(
    BenchmarkDefinition(
        benchmark_id="cmaes",
        make_default_config=_make_default_config,
        env_class=CmaEsEnv,
        codec=CmaCodec(),
        param_schema=_PARAM_SCHEMA,
        deterministic=False,
        default_reward_quality=2,
        validate_config=_validate_config,
    )
)
