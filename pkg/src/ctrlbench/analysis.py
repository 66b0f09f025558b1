"""Benchmark difficulty profiling along six dimensions.

The six dimensions: state-space size category (1-3), action-space size
category (1-3), reward quality (1-5, declared in the config), noise,
policy heterogeneity, and dynamicity.

* ``noise_score``: per seed, a fixed random policy (action seed = the
  analysis seed) is evaluated ``repeats`` times over the full instance
  set while environment stochasticity varies; the per-seed score is the
  population standard deviation over mean returns divided by the
  absolute mean return, averaged over seeds.  Deterministic benchmarks
  score exactly 0.
* ``heterogeneity_score``: for each policy of the 50-point static grid,
  the population standard deviation of per-instance mean returns divided
  by the absolute overall mean; averaged over the grid.
* ``dynamicity_score``: repeat-random policies with repeat lengths 1,
  10, 100, 1000 compete per (instance, seed); the winning length earns
  3, 2, 1, 0 points respectively, scaled into [0, 1].  Ties award the
  points of the largest tied length, so a reward that ignores actions
  scores exactly 0.

When the absolute mean in a normalized score falls below 1e-12 with a
nonzero standard deviation, the raw standard deviation is reported
instead and the result carries a ``mean_degenerate`` flag.

Population (not sample) standard deviations are used throughout.
Scores are deterministic given the benchmark config and the analysis
seeds.  All procedures accept an ``env_factory`` so tests can inject
mock environments.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .config import BenchmarkConfig, config_hash
from .environment import Environment, make_environment
from .errors import ConfigError, ParseError, StaleCacheError
from .policies import (
    REPEAT_LENGTHS,
    Policy,
    RandomPolicy,
    RepeatRandomPolicy,
    static_grid,
)

EnvFactory = Callable[[BenchmarkConfig], Environment]

DEGENERATE_MEAN = 1e-12
DIMENSIONS = (
    "state_space",
    "action_space",
    "reward_quality",
    "noise",
    "policy_heterogeneity",
    "dynamicity",
)

# reduced analysis settings used by default (full = 10 x 10)
REDUCED_SEEDS = 3
REDUCED_REPEATS = 3
FULL_SEEDS = 10
FULL_REPEATS = 10
# static-grid size for heterogeneity under each preset; the reduced grid
# keeps the full-profile wall time within budget on slow benchmarks
REDUCED_GRID = 20
FULL_GRID = 50


def space_categories(config: BenchmarkConfig) -> tuple[int, int]:
    """(state category, action category); pure function of the config."""
    action = config.action_space
    if action.is_continuous:
        action_cat = 3
    else:
        choices = action.n_choices()
        assert choices is not None
        if choices < 100:
            action_cat = 1
        elif choices <= 1000:
            action_cat = 2
        else:
            action_cat = 3
    dim = config.observation_space.dimension
    if dim < 10:
        state_cat = 1
    elif dim <= 100:
        state_cat = 2
    else:
        state_cat = 3
    return state_cat, action_cat


@dataclass(frozen=True)
class ScoreResult:
    """A normalized dispersion score plus its degenerate-mean flag."""

    value: float
    mean_degenerate: bool = False


def _run_policy_episode(env: Environment, policy: Policy,
                        context: tuple[int, ...]) -> float:
    """One episode under ``policy``; returns the cumulative reward."""
    policy.begin_episode(context)
    observation = env.reset()
    total: list[float] = []
    step_index = 0
    while True:
        action = policy.act(observation, step_index)
        result = env.step(action)
        total.append(result.reward)
        observation = result.observation
        step_index += 1
        if result.done:
            return math.fsum(total)


def _pstd(values: Sequence[float]) -> float:
    # identical values have zero dispersion by definition; computing it
    # through the mean would manufacture an epsilon whenever the rounded
    # mean differs from the common value by an ulp
    first = values[0]
    if all(value == first for value in values):
        return 0.0
    mean = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def _normalized_dispersion(values: Sequence[float]) -> ScoreResult:
    """Population std over |mean|, with degenerate means flagged."""
    mean = math.fsum(values) / len(values)
    std = _pstd(values)
    if std == 0.0:
        return ScoreResult(0.0)
    if abs(mean) < DEGENERATE_MEAN:
        return ScoreResult(std, mean_degenerate=True)
    return ScoreResult(std / abs(mean))


def noise_score(
    config: BenchmarkConfig,
    *,
    seeds: int = FULL_SEEDS,
    repeats: int = FULL_REPEATS,
    env_factory: EnvFactory = make_environment,
) -> ScoreResult:
    """Reward dispersion under repeated evaluation with fixed actions."""
    if seeds < 1 or repeats < 1:
        raise ConfigError("noise_score needs seeds >= 1 and repeats >= 1")
    per_seed: list[float] = []
    degenerate = False
    for seed in range(seeds):
        env = env_factory(config)
        env.set_run_seed(seed)
        policy = RandomPolicy(seed)
        policy.bind(env)
        count = env.instance_count
        evaluations: list[float] = []
        for _repeat in range(repeats):
            episode_returns = [
                # context omits the repeat index on purpose: the policy must
                # replay identical actions while env stochasticity varies
                _run_policy_episode(env, policy, (seed, index))
                for index in range(count)
            ]
            evaluations.append(math.fsum(episode_returns) / count)
        result = _normalized_dispersion(evaluations)
        per_seed.append(result.value)
        degenerate = degenerate or result.mean_degenerate
    return ScoreResult(math.fsum(per_seed) / seeds, mean_degenerate=degenerate)


def heterogeneity_score(
    config: BenchmarkConfig,
    *,
    grid_count: int = 50,
    run_seed: int = 0,
    env_factory: EnvFactory = make_environment,
) -> ScoreResult:
    """Dispersion of static-policy performance across the instance set."""
    policies = static_grid(config, grid_count)
    per_policy: list[float] = []
    degenerate = False
    for policy in policies:
        env = env_factory(config)
        env.set_run_seed(run_seed)
        policy.bind(env)
        count = env.instance_count
        instance_means = [
            _run_policy_episode(env, policy, (run_seed, index))
            for index in range(count)
        ]
        result = _normalized_dispersion(instance_means)
        per_policy.append(result.value)
        degenerate = degenerate or result.mean_degenerate
    return ScoreResult(math.fsum(per_policy) / len(per_policy),
                       mean_degenerate=degenerate)


_LENGTH_POINTS = {1: 3, 10: 2, 100: 1, 1000: 0}


def dynamicity_score(
    config: BenchmarkConfig,
    *,
    seeds: int = FULL_SEEDS,
    runs: int = FULL_REPEATS,
    env_factory: EnvFactory = make_environment,
) -> float:
    """How strongly performance favors rapidly changing actions; in [0, 1].

    Ties award the points of the largest tied repeat length, so action-
    independent rewards score 0.
    """
    if seeds < 1 or runs < 1:
        raise ConfigError("dynamicity_score needs seeds >= 1 and runs >= 1")
    probe = env_factory(config)
    count = probe.instance_count
    total = 0
    for seed in range(seeds):
        # averages[length][instance] = mean cumulative reward over runs
        averages: dict[int, list[float]] = {}
        for length in REPEAT_LENGTHS:
            env = env_factory(config)
            env.set_run_seed(seed)
            policy = RepeatRandomPolicy(length, seed)
            policy.bind(env)
            sums = [0.0] * count
            for run in range(runs):
                for index in range(count):
                    sums[index] += _run_policy_episode(env, policy, (seed, index, run))
            averages[length] = [s / runs for s in sums]
        for index in range(count):
            values = {length: averages[length][index] for length in REPEAT_LENGTHS}
            best = max(values.values())
            tied = [length for length in REPEAT_LENGTHS if values[length] == best]
            total += _LENGTH_POINTS[max(tied)]
    return total / (3 * count * seeds)


@dataclass(frozen=True)
class DifficultyProfile:
    """The six-dimension difficulty fingerprint of one benchmark."""

    benchmark_id: str
    state_space_category: int
    action_space_category: int
    reward_quality: int
    noise: float
    noise_degenerate: bool
    policy_heterogeneity: float
    heterogeneity_degenerate: bool
    dynamicity: float

    def __post_init__(self) -> None:
        if not 1 <= self.state_space_category <= 3:
            raise ConfigError(f"state category {self.state_space_category} not in 1..3")
        if not 1 <= self.action_space_category <= 3:
            raise ConfigError(f"action category {self.action_space_category} not in 1..3")
        if not 1 <= self.reward_quality <= 5:
            raise ConfigError(f"reward quality {self.reward_quality} not in 1..5")
        if not 0.0 <= self.dynamicity <= 1.0:
            raise ConfigError(f"dynamicity {self.dynamicity} not in [0,1]")
        if self.noise < 0 or self.policy_heterogeneity < 0:
            raise ConfigError("noise and heterogeneity must be >= 0")

    def dimension_scores(self) -> dict[str, float]:
        return {
            "state_space": float(self.state_space_category),
            "action_space": float(self.action_space_category),
            "reward_quality": float(self.reward_quality),
            "noise": self.noise,
            "policy_heterogeneity": self.policy_heterogeneity,
            "dynamicity": self.dynamicity,
        }

    def to_json_dict(self) -> dict:
        return {
            "benchmark_id": self.benchmark_id,
            "state_space_category": self.state_space_category,
            "action_space_category": self.action_space_category,
            "reward_quality": self.reward_quality,
            "noise": self.noise,
            "noise_degenerate": self.noise_degenerate,
            "policy_heterogeneity": self.policy_heterogeneity,
            "heterogeneity_degenerate": self.heterogeneity_degenerate,
            "dynamicity": self.dynamicity,
        }


def profile_from_json_dict(data: dict) -> DifficultyProfile:
    fields = {
        "benchmark_id", "state_space_category", "action_space_category",
        "reward_quality", "noise", "noise_degenerate",
        "policy_heterogeneity", "heterogeneity_degenerate", "dynamicity",
    }
    missing = fields - set(data)
    if missing:
        raise ParseError(f"profile is missing keys {sorted(missing)}")
    return DifficultyProfile(**{k: data[k] for k in fields})


def compute_profile(
    config: BenchmarkConfig,
    *,
    seeds: int = REDUCED_SEEDS,
    repeats: int = REDUCED_REPEATS,
    heterogeneity_grid: int | None = None,
    env_factory: EnvFactory = make_environment,
) -> DifficultyProfile:
    """All six dimensions for one benchmark.

    Defaults to the reduced 3-seed x 3-repeat setting with a 20-point
    heterogeneity grid; pass seeds=10, repeats=10 for the full setting,
    which also widens the grid to 50 unless overridden.
    """
    state_cat, action_cat = space_categories(config)
    if heterogeneity_grid is None:
        heterogeneity_grid = FULL_GRID if seeds >= FULL_SEEDS else REDUCED_GRID
    noise = noise_score(config, seeds=seeds, repeats=repeats, env_factory=env_factory)
    heterogeneity = heterogeneity_score(config, grid_count=heterogeneity_grid,
                                        env_factory=env_factory)
    dynamicity = dynamicity_score(config, seeds=seeds, runs=repeats,
                                  env_factory=env_factory)
    return DifficultyProfile(
        benchmark_id=config.benchmark_id,
        state_space_category=state_cat,
        action_space_category=action_cat,
        reward_quality=config.reward_quality,
        noise=noise.value,
        noise_degenerate=noise.mean_degenerate,
        policy_heterogeneity=heterogeneity.value,
        heterogeneity_degenerate=heterogeneity.mean_degenerate,
        dynamicity=dynamicity,
    )


def rank_values(values: Sequence[float]) -> list[int]:
    """Competition ranking, rank 1 = lowest value; ties share the lower rank."""
    return [1 + sum(1 for other in values if other < value) for value in values]


def emit_radar(profiles: Sequence[DifficultyProfile]) -> str:
    """Radar plot-data CSV: benchmark, dimension, raw_score, rank."""
    if not profiles:
        raise ConfigError("emit_radar needs at least one profile")
    out = io.StringIO()
    out.write("benchmark,dimension,raw_score,rank\n")
    scores = [p.dimension_scores() for p in profiles]
    for dimension in DIMENSIONS:
        values = [s[dimension] for s in scores]
        ranks = rank_values(values)
        for profile, value, rank in zip(profiles, values, ranks):
            out.write(f"{profile.benchmark_id},{dimension},{value!r},{rank}\n")
    return out.getvalue()


# -- profile caching (used by the CLI) -------------------------------------


def save_profile(path: str | Path, profile: DifficultyProfile,
                 config: BenchmarkConfig) -> None:
    """Write a profile cache entry keyed by the config's content hash."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"config_hash": config_hash(config), "profile": profile.to_json_dict()}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def load_profile(path: str | Path, config: BenchmarkConfig) -> DifficultyProfile:
    """Read a cached profile; a config-hash mismatch is a stale-cache error."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed profile cache: {exc.msg}",
                         path=str(path), line=exc.lineno) from exc
    if not isinstance(payload, dict) or "config_hash" not in payload:
        raise ParseError("profile cache has no config_hash", path=str(path))
    expected = config_hash(config)
    if payload["config_hash"] != expected:
        raise StaleCacheError(
            f"cached profile at {path} was computed for config hash "
            f"{payload['config_hash'][:12]}..., current config hashes to "
            f"{expected[:12]}...; rerun with --refresh"
        )
    return profile_from_json_dict(payload.get("profile", {}))


__all__ = [
    "DIMENSIONS",
    "ScoreResult",
    "DifficultyProfile",
    "space_categories",
    "noise_score",
    "heterogeneity_score",
    "dynamicity_score",
    "compute_profile",
    "profile_from_json_dict",
    "rank_values",
    "emit_radar",
    "save_profile",
    "load_profile",
]
