"""Black-box objective function classes for the cmaes benchmark.

Ten classic continuous minimization landscapes in their plain form: the
value at a point x is ``f_offset + base(R @ (x - optimum_shift))`` with
R an optional rotation (identity unless the instance sets
rotation_seed).  No oscillation/asymmetry warps or conditioning
pre-scalings are applied.

All classes except linear_slope attain their minimum ``f_offset`` at
``x = optimum_shift``.  linear_slope follows the boundary-optimum
construction: each coordinate term is frozen once ``x_i * shift_i >= 25``,
so the minimum is attained only when every ``|shift_i| = 5`` (the
instance generator draws linear_slope shifts from {-5, +5}^n); rotation
is not applied to it (the freeze rule is axis-aligned by definition).

Evaluation is vectorized: ``evaluate_batch`` maps an (k, n) array of
points to k values, and ``evaluate_function`` is the single-point form.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError

FUNCTION_CLASSES = (
    "sphere",
    "ellipsoid",
    "rastrigin",
    "rosenbrock",
    "schaffers_f7",
    "discus",
    "bent_cigar",
    "sharp_ridge",
    "different_powers",
    "linear_slope",
)


def _sphere(z: np.ndarray) -> np.ndarray:
    return (z * z).sum(axis=1)


def _ellipsoid(z: np.ndarray) -> np.ndarray:
    n = z.shape[1]
    weights = 10.0 ** (6.0 * np.arange(n) / (n - 1))
    return (weights * z * z).sum(axis=1)


def _rastrigin(z: np.ndarray) -> np.ndarray:
    n = z.shape[1]
    return 10.0 * (n - np.cos(2.0 * np.pi * z).sum(axis=1)) + (z * z).sum(axis=1)


def _rosenbrock(z: np.ndarray) -> np.ndarray:
    # classic Rosenbrock shifted so the minimum sits at z = 0
    w = z + 1.0
    a = w[:, :-1]
    b = w[:, 1:]
    return (100.0 * (a * a - b) ** 2 + (a - 1.0) ** 2).sum(axis=1)


def _schaffers_f7(z: np.ndarray) -> np.ndarray:
    n = z.shape[1]
    s = np.sqrt(z[:, :-1] ** 2 + z[:, 1:] ** 2)
    root = np.sqrt(s)
    term = root + root * np.sin(50.0 * s**0.2) ** 2
    return (term.sum(axis=1) / (n - 1)) ** 2


def _discus(z: np.ndarray) -> np.ndarray:
    return 1e6 * z[:, 0] ** 2 + (z[:, 1:] ** 2).sum(axis=1)


def _bent_cigar(z: np.ndarray) -> np.ndarray:
    return z[:, 0] ** 2 + 1e6 * (z[:, 1:] ** 2).sum(axis=1)


def _sharp_ridge(z: np.ndarray) -> np.ndarray:
    return z[:, 0] ** 2 + 100.0 * np.sqrt((z[:, 1:] ** 2).sum(axis=1))


def _different_powers(z: np.ndarray) -> np.ndarray:
    n = z.shape[1]
    exponents = 2.0 + 4.0 * np.arange(n) / (n - 1)
    return np.sqrt((np.abs(z) ** exponents).sum(axis=1))


_BASES = {
    "sphere": _sphere,
    "ellipsoid": _ellipsoid,
    "rastrigin": _rastrigin,
    "rosenbrock": _rosenbrock,
    "schaffers_f7": _schaffers_f7,
    "discus": _discus,
    "bent_cigar": _bent_cigar,
    "sharp_ridge": _sharp_ridge,
    "different_powers": _different_powers,
}


def make_base(function_class: str, dimension: int):
    """Per-dimension specialization of a base function.

    Returns a callable producing values identical to
    ``_BASES[function_class]``; classes with dimension-dependent constant
    vectors get them precomputed once instead of per call.
    """
    if function_class == "ellipsoid":
        weights = 10.0 ** (6.0 * np.arange(dimension) / (dimension - 1))

        def base(z: np.ndarray) -> np.ndarray:
            return (weights * z * z).sum(axis=1)
        return base
    if function_class == "different_powers":
        exponents = 2.0 + 4.0 * np.arange(dimension) / (dimension - 1)

        def base(z: np.ndarray) -> np.ndarray:
            return np.sqrt((np.abs(z) ** exponents).sum(axis=1))
        return base
    return _BASES[function_class]


def _linear_slope(x: np.ndarray, shift: np.ndarray) -> np.ndarray:
    # s_i = sign(shift_i) * 10^(i/(n-1)); term frozen at the shift once
    # x_i * shift_i >= 25, flat beyond the optimum corner.
    n = x.shape[1]
    s = np.sign(shift) * 10.0 ** (np.arange(n) / (n - 1))
    z = np.where(x * shift < 25.0, x, shift)
    return (5.0 * np.abs(s) - s * z).sum(axis=1)


def make_rotation(dimension: int, rotation_seed: int) -> np.ndarray:
    """Deterministic random orthogonal matrix (QR of a Gaussian draw)."""
    rng = np.random.default_rng(np.random.SeedSequence(rotation_seed))
    gauss = rng.standard_normal((dimension, dimension))
    q, r = np.linalg.qr(gauss)
    # fix column signs so the factorization (and matrix) is unique
    q = q * np.sign(np.diagonal(r))
    return q


def check_function_class(name: str) -> str:
    if name not in FUNCTION_CLASSES:
        raise ConfigError(
            f"unknown function_class {name!r}; valid: {', '.join(FUNCTION_CLASSES)}",
            field="function_class",
        )
    return name


def evaluate_batch(
    function_class: str,
    points: np.ndarray,
    optimum_shift: np.ndarray,
    rotation: np.ndarray | None = None,
    f_offset: float = 0.0,
) -> np.ndarray:
    """Evaluate a (k, n) batch of points; returns k function values."""
    check_function_class(function_class)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != optimum_shift.shape[0]:
        raise ConfigError(
            f"point dimension {points.shape[1]} does not match "
            f"instance dimension {optimum_shift.shape[0]}"
        )
    if not np.all(np.isfinite(points)):
        raise ConfigError("points must be finite")
    if function_class == "linear_slope":
        return f_offset + _linear_slope(points, optimum_shift)
    z = points - optimum_shift
    if rotation is not None:
        z = z @ rotation.T
    return f_offset + _BASES[function_class](z)


def evaluate_function(
    function_class: str,
    point: np.ndarray,
    optimum_shift: np.ndarray,
    rotation: np.ndarray | None = None,
    f_offset: float = 0.0,
) -> float:
    """Evaluate one point (see :func:`evaluate_batch`)."""
    return float(
        evaluate_batch(function_class, np.asarray(point, dtype=float)[None, :],
                       np.asarray(optimum_shift, dtype=float), rotation, f_offset)[0]
    )
