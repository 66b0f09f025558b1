"""Instance sets: typed records, CSV round-trip, default generators.

Every benchmark defines an :class:`InstanceCodec` describing its CSV
columns, row encoding, and seeded generator.  Shipped default sets hold
exactly 100 instances per split; train and test splits come from
independent streams of the config seed and are disjoint.  CSV files use
a header row and shortest round-trip float formatting, so writing and
re-reading a set reproduces it exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Protocol, Sequence

import numpy as np

from . import registry
from .config import BenchmarkConfig
from .errors import ConfigError, ParseError
from .seeding import SPLIT_TAGS, STREAM_INSTANCES, stream

DEFAULT_INSTANCES_PER_SPLIT = 100


class InstanceCodec(Protocol):
    """Per-benchmark instance schema: columns, row codec, generator."""

    def columns(self, instances: Sequence[Any]) -> list[str]:
        """Header row for a set of instances."""

    def encode_row(self, instance: Any, columns: list[str]) -> list[str]:
        """Encode one instance as CSV cells matching ``columns``."""

    def decode_row(self, row: dict[str, str], *, line: int, path: str) -> Any:
        """Decode one CSV row (raises ParseError on bad values)."""

    def generate(self, rng: np.random.Generator, index: int, split: str,
                 params: dict[str, Any]) -> Any:
        """Draw one instance from the benchmark's instance distribution."""


@dataclass(frozen=True)
class InstanceSet:
    """An ordered, non-empty collection of instances for one split."""

    benchmark_id: str
    split: str
    instances: tuple[Any, ...]

    def __post_init__(self) -> None:
        if self.split not in ("train", "test"):
            raise ConfigError(f"split must be 'train' or 'test', got {self.split!r}")
        if not self.instances:
            raise ConfigError("instance sets must be non-empty")

    def __len__(self) -> int:
        return len(self.instances)

    def __getitem__(self, index: int) -> Any:
        return self.instances[index]

    @property
    def instance_ids(self) -> tuple[str, ...]:
        return tuple(inst.instance_id for inst in self.instances)


def fmt_float(value: float) -> str:
    """Shortest representation that round-trips exactly."""
    return repr(float(value))


def parse_float(cell: str, *, column: str, line: int, path: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"column {column!r}: not a number: {cell!r}",
                         path=path, line=line) from None


def parse_int(cell: str, *, column: str, line: int, path: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise ParseError(f"column {column!r}: not an integer: {cell!r}",
                         path=path, line=line) from None


def write_instances(path: str | Path, instance_set: InstanceSet) -> None:
    """Write an instance set as CSV with a header row."""
    codec = registry.get(instance_set.benchmark_id).codec
    columns = codec.columns(instance_set.instances)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for inst in instance_set.instances:
            writer.writerow(codec.encode_row(inst, columns))


def read_instances(path: str | Path, benchmark_id: str, split: str) -> InstanceSet:
    """Read a CSV instance file; malformed rows raise line-numbered errors."""
    codec = registry.get(benchmark_id).codec
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"instance file not found: {path}")
    instances: list[Any] = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty instance file (header row required)",
                             path=str(path), line=1) from None
        if len(header) != len(set(header)):
            raise ParseError("duplicate column names in header", path=str(path), line=1)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} cells, got {len(row)}",
                    path=str(path), line=line_no,
                )
            record = dict(zip(header, row))
            instances.append(codec.decode_row(record, line=line_no, path=str(path)))
    if not instances:
        raise ParseError("instance file contains no instances", path=str(path), line=1)
    return InstanceSet(benchmark_id=benchmark_id, split=split, instances=tuple(instances))


def generate_instance_set(config: BenchmarkConfig, split: str) -> InstanceSet:
    """Generate a split's instance set from the config seed.

    The stream is keyed by (seed, instance tag, split), so the two splits
    are independent and a config's instance sets never depend on which
    cell seeds an experiment later uses.
    """
    definition = registry.get(config.benchmark_id)
    params = dict(config.benchmark_params)
    count = int(params.get("instance_count", DEFAULT_INSTANCES_PER_SPLIT))
    if count < 1:
        raise ConfigError("instance_count must be >= 1", field="benchmark_params.instance_count")
    rng = stream(config.seed, STREAM_INSTANCES, SPLIT_TAGS[split])
    instances = tuple(
        definition.codec.generate(rng, index, split, params) for index in range(count)
    )
    return InstanceSet(benchmark_id=config.benchmark_id, split=split, instances=instances)


def resolve_instance_set(config: BenchmarkConfig) -> InstanceSet:
    """The instance set selected by the config's instance_source."""
    source = config.instance_source
    if source.kind == "generator":
        return generate_instance_set(config, source.split)
    path = source.train_path if source.split == "train" else source.test_path
    assert path is not None
    return read_instances(path, config.benchmark_id, source.split)
