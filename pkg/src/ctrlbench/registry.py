"""Benchmark registry.

Each benchmark module registers a :class:`BenchmarkDefinition` at import
time.  The registry is the single dispatch point used by configuration
validation, instance IO, and environment construction, which keeps the
core modules free of per-benchmark imports.
"""

from __future__ import annotations

import importlib
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Mapping

from .errors import ConfigError

if TYPE_CHECKING:  # pragma: no cover - type-only imports
    from .config import BenchmarkConfig
    from .environment import Environment
    from .instances import InstanceCodec


@dataclass(frozen=True)
class ParamSpec:
    """Schema entry for one benchmark_params key."""

    type: type | tuple[type, ...]
    default: Any
    check: Callable[[Any], bool] | None = None
    describe: str = ""


@dataclass(frozen=True)
class BenchmarkDefinition:
    """Everything the core needs to know about one benchmark."""

    benchmark_id: str
    make_default_config: Callable[[dict[str, Any]], "BenchmarkConfig"]
    env_class: type
    codec: "InstanceCodec"
    param_schema: Mapping[str, ParamSpec]
    deterministic: bool
    default_reward_quality: int
    validate_config: Callable[["BenchmarkConfig"], None] | None = None


_REGISTRY: dict[str, BenchmarkDefinition] = {}
_LOADED = False


def register(definition: BenchmarkDefinition) -> None:
    _REGISTRY[definition.benchmark_id] = definition


def ensure_loaded() -> None:
    """Import the benchmark modules so they self-register."""
    global _LOADED
    if not _LOADED:
        importlib.import_module("ctrlbench.envs")
        _LOADED = True


def benchmark_ids() -> tuple[str, ...]:
    ensure_loaded()
    return tuple(sorted(_REGISTRY))


def get(benchmark_id: str) -> BenchmarkDefinition:
    ensure_loaded()
    try:
        return _REGISTRY[benchmark_id]
    except KeyError:
        raise ConfigError(
            f"unknown benchmark {benchmark_id!r}; valid: {', '.join(sorted(_REGISTRY))}",
            field="benchmark_id",
        ) from None
