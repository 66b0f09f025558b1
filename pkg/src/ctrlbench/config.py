"""Benchmark configuration objects and their JSON serialization.

Configurations are plain JSON documents with a ``format_version`` key.
Validation is strict: unknown keys are rejected at every level so typos
surface as errors instead of silently falling back to defaults.  A
canonical content hash ties trace files and analysis caches to the
exact configuration that produced them.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from . import registry
from .errors import ConfigError, ParseError
from .seeding import check_seed
from .spaces import SpaceSpec

FORMAT_VERSION = "1"

_TOP_LEVEL_KEYS = {
    "format_version",
    "benchmark_id",
    "seed",
    "episode_cutoff",
    "reward_quality",
    "action_space",
    "observation_space",
    "instance_source",
    "benchmark_params",
}

_SOURCE_KEYS = {"kind", "split", "train_path", "test_path"}


@dataclass(frozen=True)
class InstanceSource:
    """Where an environment's instances come from.

    ``generator`` sources derive the instance set from the config seed;
    ``file`` sources read CSV instance files (paths resolved relative to
    the config file's directory when loaded from disk).
    """

    kind: str = "generator"
    split: str = "train"
    train_path: str | None = None
    test_path: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("generator", "file"):
            raise ConfigError(
                f"instance_source.kind must be 'generator' or 'file', got {self.kind!r}",
                field="instance_source.kind",
            )
        if self.split not in ("train", "test"):
            raise ConfigError(
                f"instance_source.split must be 'train' or 'test', got {self.split!r}",
                field="instance_source.split",
            )
        if self.kind == "file" and not (self.train_path and self.test_path):
            raise ConfigError(
                "file sources require train_path and test_path",
                field="instance_source",
            )
        if self.kind == "generator" and (self.train_path or self.test_path):
            raise ConfigError(
                "generator sources take no paths", field="instance_source"
            )

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind, "split": self.split}
        if self.train_path is not None:
            data["train_path"] = self.train_path
        if self.test_path is not None:
            data["test_path"] = self.test_path
        return data

    @classmethod
    def from_json(cls, data: Any) -> "InstanceSource":
        if not isinstance(data, dict):
            raise ConfigError("instance_source must be an object", field="instance_source")
        unknown = set(data) - _SOURCE_KEYS
        if unknown:
            raise ConfigError(
                f"unknown keys {sorted(unknown)}", field="instance_source"
            )
        return cls(
            kind=data.get("kind", "generator"),
            split=data.get("split", "train"),
            train_path=data.get("train_path"),
            test_path=data.get("test_path"),
        )


@dataclass(frozen=True)
class BenchmarkConfig:
    """Complete, self-contained description of one benchmark setup."""

    benchmark_id: str
    seed: int
    episode_cutoff: int
    reward_quality: int
    action_space: SpaceSpec
    observation_space: SpaceSpec
    instance_source: InstanceSource = field(default_factory=InstanceSource)
    benchmark_params: Mapping[str, Any] = field(default_factory=dict)
    format_version: str = FORMAT_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(self, "benchmark_params", dict(self.benchmark_params))

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "format_version": self.format_version,
            "benchmark_id": self.benchmark_id,
            "seed": self.seed,
            "episode_cutoff": self.episode_cutoff,
            "reward_quality": self.reward_quality,
            "action_space": self.action_space.to_json(),
            "observation_space": self.observation_space.to_json(),
            "instance_source": self.instance_source.to_json(),
            "benchmark_params": dict(self.benchmark_params),
        }

    def with_overrides(self, overrides: Mapping[str, Any]) -> "BenchmarkConfig":
        """Return a validated copy with top-level/benchmark_params overrides."""
        data = self.to_json_dict()
        for key, value in overrides.items():
            if key == "benchmark_params":
                if not isinstance(value, Mapping):
                    raise ConfigError("benchmark_params override must be a mapping",
                                      field="benchmark_params")
                data["benchmark_params"] = {**data["benchmark_params"], **value}
            elif key in _TOP_LEVEL_KEYS:
                data[key] = copy.deepcopy(value) if isinstance(value, (dict, list)) else value
            else:
                raise ConfigError(f"unknown override key {key!r}", field=key)
        return config_from_json_dict(data)


def _require_int(data: Mapping[str, Any], key: str, *, minimum: int | None = None,
                 maximum: int | None = None) -> int:
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"must be an integer, got {value!r}", field=key)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", field=key)
    if maximum is not None and value > maximum:
        raise ConfigError(f"must be <= {maximum}, got {value}", field=key)
    return value


def validate_benchmark_params(benchmark_id: str, params: Mapping[str, Any]) -> dict[str, Any]:
    """Check params against the benchmark's schema and fill in defaults."""
    definition = registry.get(benchmark_id)
    schema = definition.param_schema
    unknown = set(params) - set(schema)
    if unknown:
        raise ConfigError(
            f"unknown keys {sorted(unknown)}", field="benchmark_params"
        )
    resolved: dict[str, Any] = {}
    for name, spec in schema.items():
        value = params.get(name, spec.default)
        types = spec.type if isinstance(spec.type, tuple) else (spec.type,)
        ok = isinstance(value, types) and not (
            isinstance(value, bool) and bool not in types
        )
        # ints are acceptable where floats are expected
        if not ok and float in types and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
            ok = True
        if not ok:
            raise ConfigError(
                f"expected {'/'.join(t.__name__ for t in types)}, got {value!r}",
                field=f"benchmark_params.{name}",
            )
        if spec.check is not None and not spec.check(value):
            raise ConfigError(
                f"invalid value {value!r}" + (f" ({spec.describe})" if spec.describe else ""),
                field=f"benchmark_params.{name}",
            )
        resolved[name] = value
    return resolved


def config_from_json_dict(data: Any) -> BenchmarkConfig:
    """Build and fully validate a config from parsed JSON."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    missing = _TOP_LEVEL_KEYS - set(data) - {"instance_source", "benchmark_params"}
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)}")
    version = data["format_version"]
    if version != FORMAT_VERSION:
        raise ConfigError(
            f"unsupported format_version {version!r} (supported: {FORMAT_VERSION})",
            field="format_version",
        )
    benchmark_id = data["benchmark_id"]
    definition = registry.get(benchmark_id)
    seed = check_seed(data["seed"])
    cutoff = _require_int(data, "episode_cutoff", minimum=1)
    quality = _require_int(data, "reward_quality", minimum=1, maximum=5)
    action_space = SpaceSpec.from_json(data["action_space"], field_name="action_space")
    observation_space = SpaceSpec.from_json(
        data["observation_space"], field_name="observation_space"
    )
    source = InstanceSource.from_json(data.get("instance_source", {}))
    params = validate_benchmark_params(benchmark_id, data.get("benchmark_params", {}))
    config = BenchmarkConfig(
        benchmark_id=benchmark_id,
        seed=seed,
        episode_cutoff=cutoff,
        reward_quality=quality,
        action_space=action_space,
        observation_space=observation_space,
        instance_source=source,
        benchmark_params=params,
        format_version=version,
    )
    if definition.validate_config is not None:
        definition.validate_config(config)
    return config


def default_config(benchmark_id: str, overrides: Mapping[str, Any] | None = None) -> BenchmarkConfig:
    """The shipped default configuration for a benchmark, plus overrides."""
    definition = registry.get(benchmark_id)
    config = definition.make_default_config(dict(overrides or {}))
    return config


def canonical_json(data: Any) -> str:
    """Canonical serialization used for hashing (sorted keys, compact)."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(config: BenchmarkConfig) -> str:
    """Content hash of the fully resolved configuration."""
    payload = canonical_json(config.to_json_dict()).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def save_config(config: BenchmarkConfig, path: str | Path) -> None:
    """Write a config as human-readable UTF-8 JSON."""
    text = json.dumps(config.to_json_dict(), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_config(path: str | Path) -> BenchmarkConfig:
    """Read and validate a config file; file-source paths become absolute."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {path}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from None
    config = config_from_json_dict(data)
    source = config.instance_source
    if source.kind == "file":
        base = path.parent
        resolved = InstanceSource(
            kind="file",
            split=source.split,
            train_path=str((base / source.train_path).resolve())
            if not Path(source.train_path).is_absolute() else source.train_path,
            test_path=str((base / source.test_path).resolve())
            if not Path(source.test_path).is_absolute() else source.test_path,
        )
        config = BenchmarkConfig(
            benchmark_id=config.benchmark_id,
            seed=config.seed,
            episode_cutoff=config.episode_cutoff,
            reward_quality=config.reward_quality,
            action_space=config.action_space,
            observation_space=config.observation_space,
            instance_source=resolved,
            benchmark_params=config.benchmark_params,
            format_version=config.format_version,
        )
    return config
