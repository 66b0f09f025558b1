"""Experiment grids: (policy x seed) cells over an instance set.

``run_suite`` executes every cell of an :class:`ExperimentPlan`, writes
one JSONL trace per cell plus ``summary.csv`` (one row per policy, seed
and instance) and ``report.csv`` (one row per policy with a 95%
confidence interval across seeds).  Cell failures are isolated: the
suite keeps going and flags the failed cells in the report.

The empirical objective is a two-level mean: episodes are averaged
within each instance first, then uniformly across instances
(``estimate_return``).  All float summation uses ``math.fsum`` so
results do not depend on accumulation order.

Neither CSV contains wall-clock columns, so reruns of an identical plan
produce byte-identical summaries; per-step timings live only in the
traces.
"""

from __future__ import annotations

import io
import math
import time
import uuid
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .config import BenchmarkConfig, config_from_json_dict, config_hash
from .environment import Environment, make_environment
from .errors import CellExecutionError, ConfigError, IncompleteGridError
from .instances import fmt_float
from .policies import Policy, make_policy
from .traces import EpisodeSummary, StepLogRecord, TraceLogger


@dataclass(frozen=True)
class ExperimentPlan:
    """Full description of one experiment grid."""

    benchmark_config: BenchmarkConfig
    policies: tuple[str, ...]
    seeds: tuple[int, ...] = tuple(range(10))
    episodes_per_instance: int = 1
    output_dir: str | None = None
    log_observations: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.policies:
            raise ConfigError("plan needs at least one policy")
        if not self.seeds:
            raise ConfigError("plan needs at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"seeds must be distinct, got {self.seeds}")
        if self.episodes_per_instance < 1:
            raise ConfigError("episodes_per_instance must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


@dataclass
class CellResult:
    """Outcome of one (policy, seed) cell."""

    policy_id: str
    seed: int
    summaries: list[EpisodeSummary] = field(default_factory=list)
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class SuiteReport:
    """Everything run_suite produced, with paths to the emitted files."""

    run_id: str
    run_dir: Path | None
    instance_ids: tuple[str, ...]
    cells: list[CellResult]
    summary_path: Path | None = None
    report_path: Path | None = None

    @property
    def failures(self) -> list[CellResult]:
        return [c for c in self.cells if c.failed]


def run_episode(
    env: Environment,
    policy: Policy,
    *,
    policy_context: tuple[int, ...] = (),
    episode_index: int = 0,
    logger: TraceLogger | None = None,
    run_id: str = "",
    config_hash_hex: str = "",
    seed: int = 0,
    log_observations: bool = False,
) -> EpisodeSummary:
    """Run one full episode; annotates any error with its coordinates."""
    policy_id = policy.policy_id
    instance_id = ""
    try:
        policy.begin_episode(policy_context)
        observation = env.reset()
        instance_id = env.current_instance.instance_id
        rewards: list[float] = []
        wall_total = 0
        step_index = 0
        done = False
        while not done:
            action = policy.act(observation, step_index)
            started = time.perf_counter_ns()
            result = env.step(action)
            elapsed = time.perf_counter_ns() - started
            wall_total += elapsed
            rewards.append(result.reward)
            if logger is not None:
                logger.append(
                    StepLogRecord(
                        run_id=run_id,
                        benchmark=env.config.benchmark_id,
                        config_hash=config_hash_hex,
                        policy_id=policy_id,
                        seed=seed,
                        instance_id=instance_id,
                        episode=episode_index,
                        step=step_index,
                        action=action,
                        reward=result.reward,
                        observation=(
                            tuple(float(v) for v in result.observation)
                            if log_observations
                            else None
                        ),
                        wall_time_ns=elapsed,
                    )
                )
            observation = result.observation
            step_index += 1
            done = result.done
        if logger is not None:
            logger.end_episode()
        return EpisodeSummary(
            policy_id=policy_id,
            seed=seed,
            instance_id=instance_id,
            episode=episode_index,
            cumulative_reward=math.fsum(rewards),
            steps_taken=step_index,
            wall_time_ns=wall_total,
        )
    except CellExecutionError:
        raise
    except Exception as exc:
        raise CellExecutionError(
            f"{type(exc).__name__}: {exc}",
            policy_id=policy_id,
            seed=seed,
            instance_id=instance_id,
        ) from exc


def run_cell(
    config: BenchmarkConfig,
    policy_text: str,
    seed: int,
    *,
    episodes_per_instance: int = 1,
    trace_path: str | Path | None = None,
    run_id: str = "",
    log_observations: bool = False,
) -> list[EpisodeSummary]:
    """Execute one (policy, seed) cell over the full instance set."""
    env = make_environment(config)
    env.set_run_seed(seed)
    policy = make_policy(policy_text, config)
    policy.bind(env)
    hash_hex = config_hash(config)
    count = env.instance_count
    logger = TraceLogger(trace_path) if trace_path is not None else None
    summaries: list[EpisodeSummary] = []
    try:
        for episode in range(count * episodes_per_instance):
            instance_index = episode % count
            repetition = episode // count
            summaries.append(
                run_episode(
                    env,
                    policy,
                    policy_context=(config.seed, seed, instance_index, repetition),
                    episode_index=episode,
                    logger=logger,
                    run_id=run_id,
                    config_hash_hex=hash_hex,
                    seed=seed,
                    log_observations=log_observations,
                )
            )
    finally:
        if logger is not None:
            logger.close()
    return summaries


def estimate_return(
    summaries: Iterable[EpisodeSummary],
    instance_ids: Sequence[str] | None = None,
) -> float:
    """Mean over instances of the mean episode return within each instance.

    With ``instance_ids`` given, every listed instance must appear in the
    summaries; missing ones raise IncompleteGridError naming them.
    """
    per_instance: dict[str, list[float]] = {}
    for summary in summaries:
        per_instance.setdefault(summary.instance_id, []).append(
            summary.cumulative_reward
        )
    if instance_ids is None:
        instance_ids = list(per_instance)
    missing = tuple(i for i in instance_ids if i not in per_instance)
    if missing:
        raise IncompleteGridError(
            f"no episodes for {len(missing)} instance(s): {list(missing[:5])}"
            + ("..." if len(missing) > 5 else ""),
            missing=missing,
        )
    if not instance_ids:
        raise IncompleteGridError("no instances to aggregate over")
    means = [
        math.fsum(per_instance[i]) / len(per_instance[i]) for i in instance_ids
    ]
    return math.fsum(means) / len(means)


def _cell_task(args: tuple) -> tuple[str, int, list[EpisodeSummary], str | None]:
    """Worker entry point for parallel cells (must stay module-level)."""
    (config_dict, policy_text, seed, episodes_per_instance, trace_path,
     run_id, log_observations) = args
    config = config_from_json_dict(config_dict)
    policy_id = make_policy(policy_text).policy_id
    try:
        summaries = run_cell(
            config, policy_text, seed,
            episodes_per_instance=episodes_per_instance,
            trace_path=trace_path, run_id=run_id,
            log_observations=log_observations,
        )
        return policy_id, seed, summaries, None
    except CellExecutionError as exc:
        return policy_id, seed, [], str(exc)


def run_suite(plan: ExperimentPlan) -> SuiteReport:
    """Execute the full grid, isolating cell failures, and emit CSVs."""
    config = plan.benchmark_config
    run_id = uuid.uuid4().hex[:12]
    run_dir: Path | None = None
    if plan.output_dir is not None:
        run_dir = Path(plan.output_dir) / run_id
        run_dir.mkdir(parents=True, exist_ok=True)

    # the instance set is a pure function of the config, so one probe
    # environment tells us the instance ids every cell will see
    probe = make_environment(config)
    instance_ids = tuple(probe.instance_set.instance_ids)

    tasks = []
    for policy_text in plan.policies:
        policy_id = make_policy(policy_text, config).policy_id
        for seed in plan.seeds:
            trace_path = (
                str(run_dir / f"{_safe_filename(policy_id)}_{seed}.jsonl")
                if run_dir is not None
                else None
            )
            tasks.append((policy_text, policy_id, seed, trace_path))

    cells: list[CellResult] = []
    if plan.jobs > 1:
        packed = [
            (config.to_json_dict(), text, seed, plan.episodes_per_instance,
             trace, run_id, plan.log_observations)
            for text, _pid, seed, trace in tasks
        ]
        with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            for policy_id, seed, summaries, error in pool.map(_cell_task, packed):
                cells.append(CellResult(policy_id=policy_id, seed=seed,
                                        summaries=summaries, error=error))
    else:
        for policy_text, policy_id, seed, trace_path in tasks:
            try:
                summaries = run_cell(
                    config, policy_text, seed,
                    episodes_per_instance=plan.episodes_per_instance,
                    trace_path=trace_path, run_id=run_id,
                    log_observations=plan.log_observations,
                )
                cells.append(CellResult(policy_id=policy_id, seed=seed,
                                        summaries=summaries))
            except CellExecutionError as exc:
                cells.append(CellResult(policy_id=policy_id, seed=seed,
                                        error=str(exc)))

    report = SuiteReport(run_id=run_id, run_dir=run_dir,
                         instance_ids=instance_ids, cells=cells)
    if run_dir is not None:
        report.summary_path = run_dir / "summary.csv"
        report.summary_path.write_text(
            render_summary_csv(config.benchmark_id, cells), encoding="utf-8"
        )
        report.report_path = run_dir / "report.csv"
        report.report_path.write_text(
            render_report_csv(config.benchmark_id, cells, instance_ids),
            encoding="utf-8",
        )
    return report


def _safe_filename(policy_id: str) -> str:
    return policy_id.replace("/", "_")


def _population_std(values: Sequence[float]) -> float:
    # constant samples have zero spread by definition; going through the
    # rounded mean would report an ulp-scale artifact instead
    first = values[0]
    if all(value == first for value in values):
        return 0.0
    mean = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def render_summary_csv(benchmark_id: str, cells: Sequence[CellResult]) -> str:
    """One row per (policy, seed, instance): episode statistics."""
    out = io.StringIO()
    out.write(
        "benchmark,policy,seed,instance_id,episodes,"
        "mean_cum_reward,std_cum_reward,steps_mean\n"
    )
    for cell in cells:
        if cell.failed:
            continue
        grouped: dict[str, list[EpisodeSummary]] = {}
        for summary in cell.summaries:
            grouped.setdefault(summary.instance_id, []).append(summary)
        for instance_id, summaries in grouped.items():
            rewards = [s.cumulative_reward for s in summaries]
            n = len(rewards)
            mean = math.fsum(rewards) / n
            std = _population_std(rewards)
            steps_mean = math.fsum(s.steps_taken for s in summaries) / n
            out.write(
                f"{benchmark_id},{cell.policy_id},{cell.seed},{instance_id},"
                f"{n},{fmt_float(mean)},{fmt_float(std)},{fmt_float(steps_mean)}\n"
            )
    return out.getvalue()


def render_report_csv(
    benchmark_id: str,
    cells: Sequence[CellResult],
    instance_ids: Sequence[str],
) -> str:
    """One row per policy: mean across seeds with a normal 95% CI."""
    out = io.StringIO()
    out.write(
        "benchmark,policy,seeds,mean_return,std_return,"
        "ci95_low,ci95_high,failed_seeds\n"
    )
    by_policy: dict[str, list[CellResult]] = {}
    for cell in cells:
        by_policy.setdefault(cell.policy_id, []).append(cell)
    for policy_id, policy_cells in by_policy.items():
        good = [c for c in policy_cells if not c.failed]
        failed = sorted(c.seed for c in policy_cells if c.failed)
        failed_text = ";".join(str(s) for s in failed)
        if not good:
            out.write(
                f"{benchmark_id},{policy_id},0,,,,,{failed_text}\n"
            )
            continue
        seed_returns = [
            estimate_return(c.summaries, instance_ids) for c in good
        ]
        n = len(seed_returns)
        mean = math.fsum(seed_returns) / n
        std = _population_std(seed_returns)
        half = 1.96 * std / math.sqrt(n)
        out.write(
            f"{benchmark_id},{policy_id},{n},{fmt_float(mean)},{fmt_float(std)},"
            f"{fmt_float(mean - half)},{fmt_float(mean + half)},{failed_text}\n"
        )
    return out.getvalue()


def policy_returns(
    report: SuiteReport,
) -> dict[str, list[tuple[int, float]]]:
    """Per-policy (seed, estimated return) pairs from completed cells."""
    result: dict[str, list[tuple[int, float]]] = {}
    for cell in report.cells:
        if cell.failed:
            continue
        result.setdefault(cell.policy_id, []).append(
            (cell.seed, estimate_return(cell.summaries, report.instance_ids))
        )
    return result


__all__ = [
    "ExperimentPlan",
    "CellResult",
    "SuiteReport",
    "run_episode",
    "run_cell",
    "run_suite",
    "estimate_return",
    "render_summary_csv",
    "render_report_csv",
    "policy_returns",
]
