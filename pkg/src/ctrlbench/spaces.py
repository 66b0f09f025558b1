"""Action and observation space descriptions.

A :class:`SpaceSpec` is a small, serializable value object.  Membership
checks are strict: discrete actions must be integral and in range,
continuous actions must be finite and inside the bounds.  Nothing is
ever clamped on the caller's behalf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .errors import ConfigError

KINDS = ("discrete", "multi_discrete", "continuous")


def _is_int(value: Any) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def _as_scalar(value: Any) -> float | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float, np.integer, np.floating)):
        return float(value)
    if isinstance(value, np.ndarray) and value.ndim == 0:
        return float(value)
    return None


@dataclass(frozen=True)
class SpaceSpec:
    """Description of a discrete, multi-discrete, or continuous space.

    Attributes:
        kind: one of ``discrete``, ``multi_discrete``, ``continuous``.
        cardinalities: per-dimension action counts (discrete kinds only).
        bounds: per-dimension ``(low, high)`` pairs (continuous only).
    """

    kind: str
    cardinalities: tuple[int, ...] | None = None
    bounds: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown space kind {self.kind!r}", field="kind")
        if self.kind in ("discrete", "multi_discrete"):
            if self.bounds is not None:
                raise ConfigError("bounds are only valid for continuous spaces", field="bounds")
            if not self.cardinalities:
                raise ConfigError("cardinalities are required", field="cardinalities")
            cards = tuple(int(c) for c in self.cardinalities)
            object.__setattr__(self, "cardinalities", cards)
            if self.kind == "discrete" and len(cards) != 1:
                raise ConfigError(
                    "discrete spaces have exactly one cardinality", field="cardinalities"
                )
            for c in cards:
                if c < 1:
                    raise ConfigError(f"cardinalities must be >= 1, got {c}", field="cardinalities")
        else:
            if self.cardinalities is not None:
                raise ConfigError(
                    "cardinalities are only valid for discrete spaces", field="cardinalities"
                )
            if not self.bounds:
                raise ConfigError("bounds are required", field="bounds")
            norm = []
            for pair in self.bounds:
                if len(pair) != 2:
                    raise ConfigError("each bound must be a (low, high) pair", field="bounds")
                low, high = float(pair[0]), float(pair[1])
                if math.isnan(low) or math.isnan(high) or not low < high:
                    raise ConfigError(
                        f"bounds require low < high, got ({low}, {high})", field="bounds"
                    )
                norm.append((low, high))
            object.__setattr__(self, "bounds", tuple(norm))

    @property
    def dimension(self) -> int:
        if self.kind == "continuous":
            assert self.bounds is not None
            return len(self.bounds)
        assert self.cardinalities is not None
        return len(self.cardinalities)

    @property
    def is_continuous(self) -> bool:
        return self.kind == "continuous"

    def n_choices(self) -> int | None:
        """Total number of distinct actions, or None for continuous spaces."""
        if self.kind == "continuous":
            return None
        assert self.cardinalities is not None
        return math.prod(self.cardinalities)

    def contains(self, action: Any) -> bool:
        """Strict membership check; no coercion beyond int/float widening."""
        if self.kind == "discrete":
            assert self.cardinalities is not None
            return _is_int(action) and 0 <= int(action) < self.cardinalities[0]
        if self.kind == "multi_discrete":
            assert self.cardinalities is not None
            values = _sequence_of(action, len(self.cardinalities))
            if values is None:
                return False
            return all(
                _is_int(v) and 0 <= int(v) < c for v, c in zip(values, self.cardinalities)
            )
        assert self.bounds is not None
        if len(self.bounds) == 1:
            scalar = _as_scalar(action)
            if scalar is None:
                return False
            low, high = self.bounds[0]
            return math.isfinite(scalar) and low <= scalar <= high
        values = _sequence_of(action, len(self.bounds))
        if values is None:
            return False
        for v, (low, high) in zip(values, self.bounds):
            scalar = _as_scalar(v)
            if scalar is None or not math.isfinite(scalar) or not low <= scalar <= high:
                return False
        return True

    def sample(self, rng: np.random.Generator) -> Any:
        """Draw a uniform action.

        Continuous dimensions sample from ``(low, high]``: the draw is
        ``high - U[0, span)``, which keeps open lower bounds (the cmaes
        step-size space) valid without a special case.
        """
        if self.kind == "discrete":
            assert self.cardinalities is not None
            return int(rng.integers(self.cardinalities[0]))
        if self.kind == "multi_discrete":
            assert self.cardinalities is not None
            return tuple(int(rng.integers(c)) for c in self.cardinalities)
        assert self.bounds is not None
        values = [high - float(rng.uniform(0.0, high - low)) for low, high in self.bounds]
        if len(values) == 1:
            return values[0]
        return tuple(values)

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind, "dimension": self.dimension}
        if self.cardinalities is not None:
            data["cardinalities"] = list(self.cardinalities)
        if self.bounds is not None:
            data["bounds"] = [list(pair) for pair in self.bounds]
        return data

    @classmethod
    def from_json(cls, data: Any, *, field_name: str = "space") -> "SpaceSpec":
        if not isinstance(data, dict):
            raise ConfigError("space must be an object", field=field_name)
        allowed = {"kind", "dimension", "cardinalities", "bounds"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(
                f"unknown keys {sorted(unknown)}", field=f"{field_name}"
            )
        kind = data.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"unknown space kind {kind!r}", field=f"{field_name}.kind")
        cards = data.get("cardinalities")
        bounds = data.get("bounds")
        spec = cls(
            kind=kind,
            cardinalities=tuple(cards) if cards is not None else None,
            bounds=tuple(tuple(b) for b in bounds) if bounds is not None else None,
        )
        if "dimension" in data and int(data["dimension"]) != spec.dimension:
            raise ConfigError(
                f"dimension {data['dimension']} does not match {spec.dimension}",
                field=f"{field_name}.dimension",
            )
        return spec


def _sequence_of(action: Any, length: int) -> list[Any] | None:
    if isinstance(action, np.ndarray):
        if action.ndim != 1 or action.shape[0] != length:
            return None
        return list(action)
    if isinstance(action, (list, tuple)):
        if len(action) != length:
            return None
        return list(action)
    return None


def discrete(n: int) -> SpaceSpec:
    return SpaceSpec(kind="discrete", cardinalities=(n,))


def multi_discrete(cards: Iterable[int]) -> SpaceSpec:
    return SpaceSpec(kind="multi_discrete", cardinalities=tuple(cards))


def continuous(bounds: Iterable[tuple[float, float]]) -> SpaceSpec:
    return SpaceSpec(kind="continuous", bounds=tuple(tuple(b) for b in bounds))
