"""Structured experiment traces: JSONL step records and plot-ready CSV.

One trace file holds every step of one (policy, seed) execution unit.
Records serialize as single JSON lines with a fixed key order; floats
use Python's shortest round-trip formatting, so reloading a trace
reproduces every numeric field bit for bit.  Reruns of an identical
plan differ only in ``run_id`` and ``wall_time_ns``.

File naming convention: ``<run_id>/<policy_id>_<seed>.jsonl``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import ConfigError, IntegrityError, ParseError

Action = Any  # int, float, or tuple of ints/floats


@dataclass(frozen=True)
class StepLogRecord:
    """One environment step, keyed by run, cell, instance, episode, step."""

    run_id: str
    benchmark: str
    config_hash: str
    policy_id: str
    seed: int
    instance_id: str
    episode: int
    step: int
    action: Action
    reward: float
    observation: tuple[float, ...] | None
    wall_time_ns: int

    def to_json_line(self) -> str:
        data: dict[str, Any] = {
            "run_id": self.run_id,
            "benchmark": self.benchmark,
            "config_hash": self.config_hash,
            "policy_id": self.policy_id,
            "seed": self.seed,
            "instance_id": self.instance_id,
            "episode": self.episode,
            "step": self.step,
            "action": _encode_action(self.action),
            "reward": float(self.reward),
        }
        if self.observation is not None:
            data["observation"] = [float(v) for v in self.observation]
        data["wall_time_ns"] = self.wall_time_ns
        return json.dumps(data, separators=(",", ":"))


_REQUIRED_KEYS = {
    "run_id", "benchmark", "config_hash", "policy_id", "seed",
    "instance_id", "episode", "step", "action", "reward", "wall_time_ns",
}
_ALL_KEYS = _REQUIRED_KEYS | {"observation"}


def _encode_action(action: Action) -> Any:
    if isinstance(action, tuple):
        return [int(a) if isinstance(a, int) else float(a) for a in action]
    if isinstance(action, bool):
        raise ConfigError(f"boolean is not a valid action: {action!r}")
    if isinstance(action, int):
        return action
    return float(action)


def _decode_action(value: Any) -> Action:
    if isinstance(value, list):
        return tuple(value)
    return value


def record_from_json_dict(data: dict[str, Any], *, path: str = "", line: int = 0) -> StepLogRecord:
    """Strictly decode one parsed JSON object into a StepLogRecord."""
    keys = set(data)
    missing = _REQUIRED_KEYS - keys
    if missing:
        raise ParseError(f"missing keys {sorted(missing)}", path=path, line=line)
    unknown = keys - _ALL_KEYS
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)}", path=path, line=line)
    observation = data.get("observation")
    return StepLogRecord(
        run_id=data["run_id"],
        benchmark=data["benchmark"],
        config_hash=data["config_hash"],
        policy_id=data["policy_id"],
        seed=int(data["seed"]),
        instance_id=data["instance_id"],
        episode=int(data["episode"]),
        step=int(data["step"]),
        action=_decode_action(data["action"]),
        reward=float(data["reward"]),
        observation=None if observation is None else tuple(float(v) for v in observation),
        wall_time_ns=int(data["wall_time_ns"]),
    )


class TraceLogger:
    """Append-only JSONL writer for one (policy, seed) execution unit.

    Writes are buffered and flushed at episode boundaries via
    ``end_episode``; the write path never checks for duplicates (that
    happens on reload).
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle: io.TextIOWrapper | None = open(self.path, "w", encoding="utf-8")
        self._buffer: list[str] = []

    def append(self, record: StepLogRecord) -> None:
        if self._handle is None:
            raise ConfigError(f"logger for {self.path} is closed")
        self._buffer.append(record.to_json_line())

    def end_episode(self) -> None:
        if self._handle is None:
            raise ConfigError(f"logger for {self.path} is closed")
        if self._buffer:
            self._handle.write("\n".join(self._buffer) + "\n")
            self._buffer.clear()
        self._handle.flush()

    def close(self) -> None:
        if self._handle is not None:
            self.end_episode()
            self._handle.close()
            self._handle = None

    def __enter__(self) -> "TraceLogger":
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()


def reload_trace(path: str | Path) -> list[StepLogRecord]:
    """Parse a trace file; malformed lines and duplicate keys are errors.

    An empty file yields an empty list.  Errors carry 1-based line
    numbers.  The uniqueness key is (run_id, seed, instance_id, episode,
    step).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"trace file not found: {path}")
    records: list[StepLogRecord] = []
    seen: set[tuple[str, int, str, int, int]] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                data = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ParseError(
                    f"malformed JSON: {exc.msg}", path=str(path), line=lineno
                ) from exc
            if not isinstance(data, dict):
                raise ParseError("record is not a JSON object", path=str(path), line=lineno)
            record = record_from_json_dict(data, path=str(path), line=lineno)
            key = (record.run_id, record.seed, record.instance_id,
                   record.episode, record.step)
            if key in seen:
                raise IntegrityError(
                    f"duplicate record for (run_id, seed, instance, episode, step) = {key}",
                    line=lineno,
                )
            seen.add(key)
            records.append(record)
    return records


@dataclass(frozen=True)
class EpisodeSummary:
    """Cumulative outcome of one episode."""

    policy_id: str
    seed: int
    instance_id: str
    episode: int
    cumulative_reward: float
    steps_taken: int
    wall_time_ns: int = 0

    def key(self) -> tuple[str, int, str, int]:
        return (self.policy_id, self.seed, self.instance_id, self.episode)


def derive_episode_summaries(records: Iterable[StepLogRecord]) -> list[EpisodeSummary]:
    """Recompute per-episode cumulative rewards (exact fsum) from records."""
    groups: dict[tuple[str, int, str, int], list[StepLogRecord]] = {}
    for record in records:
        key = (record.policy_id, record.seed, record.instance_id, record.episode)
        groups.setdefault(key, []).append(record)
    summaries = []
    for (policy_id, seed, instance_id, episode), steps in groups.items():
        summaries.append(
            EpisodeSummary(
                policy_id=policy_id,
                seed=seed,
                instance_id=instance_id,
                episode=episode,
                cumulative_reward=math.fsum(r.reward for r in steps),
                steps_taken=len(steps),
                wall_time_ns=sum(r.wall_time_ns for r in steps),
            )
        )
    return summaries


PLOT_KINDS = ("policy_performance", "per_instance", "action_trajectory")


def to_plot_data(records: list[StepLogRecord], kind: str) -> str:
    """Aggregate records into a plot-ready CSV string."""
    if kind not in PLOT_KINDS:
        raise ConfigError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
    if not records:
        raise ConfigError("no records to aggregate")
    out = io.StringIO()
    if kind == "action_trajectory":
        out.write("policy,seed,instance_id,episode,step,action\n")
        for r in records:
            action = _encode_action(r.action)
            if isinstance(action, list):
                action = '"' + ",".join(repr(a) for a in action) + '"'
            else:
                action = repr(action) if isinstance(action, float) else str(action)
            out.write(f"{r.policy_id},{r.seed},{r.instance_id},{r.episode},{r.step},{action}\n")
        return out.getvalue()

    summaries = derive_episode_summaries(records)
    if kind == "per_instance":
        by_instance: dict[str, list[float]] = {}
        for s in summaries:
            by_instance.setdefault(s.instance_id, []).append(s.cumulative_reward)
        out.write("instance_id,episodes,mean_cum_reward\n")
        for instance_id, rewards in by_instance.items():
            mean = math.fsum(rewards) / len(rewards)
            out.write(f"{instance_id},{len(rewards)},{mean!r}\n")
        return out.getvalue()

    # policy_performance: per-policy mean with a 95% CI across seeds
    by_policy_seed: dict[str, dict[int, list[float]]] = {}
    for s in summaries:
        by_policy_seed.setdefault(s.policy_id, {}).setdefault(s.seed, []).append(
            s.cumulative_reward
        )
    out.write("policy,seeds,mean,std,ci95_low,ci95_high\n")
    for policy_id, per_seed in by_policy_seed.items():
        seed_means = [math.fsum(v) / len(v) for v in per_seed.values()]
        n = len(seed_means)
        mean = math.fsum(seed_means) / n
        variance = math.fsum((m - mean) ** 2 for m in seed_means) / n
        std = math.sqrt(variance)
        half = 1.96 * std / math.sqrt(n)
        out.write(
            f"{policy_id},{n},{mean!r},{std!r},{(mean - half)!r},{(mean + half)!r}\n"
        )
    return out.getvalue()


def merge_traces(paths: Iterable[str | Path]) -> list[StepLogRecord]:
    """Concatenate several trace files with a fresh integrity re-check."""
    records: list[StepLogRecord] = []
    seen: set[tuple[str, str, int, str, int, int]] = set()
    for path in paths:
        for record in reload_trace(path):
            key = (record.policy_id, record.run_id, record.seed,
                   record.instance_id, record.episode, record.step)
            if key in seen:
                raise IntegrityError(f"duplicate record across traces: {key}")
            seen.add(key)
            records.append(record)
    return records


def iter_run_traces(run_dir: str | Path) -> Iterator[Path]:
    """Trace files of one run directory, sorted for determinism."""
    run_dir = Path(run_dir)
    return iter(sorted(run_dir.glob("*.jsonl")))


__all__ = [
    "StepLogRecord",
    "EpisodeSummary",
    "TraceLogger",
    "reload_trace",
    "record_from_json_dict",
    "derive_episode_summaries",
    "to_plot_data",
    "merge_traces",
    "iter_run_traces",
    "PLOT_KINDS",
]
