"""Exception hierarchy shared across the package.

Every error raised by ctrlbench derives from :class:`CtrlBenchError` so
callers can catch the whole family at once.  The CLI maps these onto
process exit codes (see ``ctrlbench.cli``).
"""

from __future__ import annotations


class CtrlBenchError(Exception):
    """Base class for all package errors."""


class ConfigError(CtrlBenchError, ValueError):
    """A configuration value, schema, or argument is invalid.

    ``field`` names the offending entry when known.
    """

    def __init__(self, message: str, *, field: str | None = None) -> None:
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class ParseError(CtrlBenchError, ValueError):
    """A file could not be parsed.  ``line`` is 1-based when applicable."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None) -> None:
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        if prefix:
            message = f"{prefix}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class ActionError(CtrlBenchError, ValueError):
    """An action lies outside the environment's action space.

    Out-of-bounds actions are rejected, never clamped.
    """


class StateError(CtrlBenchError, RuntimeError):
    """The reset/step protocol was violated (step before reset, step after done)."""


class IntegrityError(CtrlBenchError, ValueError):
    """A trace file is internally inconsistent (e.g. duplicate step records)."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class IncompleteGridError(CtrlBenchError, ValueError):
    """A return estimate was requested over an incomplete instance grid."""

    def __init__(self, message: str, *, missing: tuple[str, ...] = ()) -> None:
        super().__init__(message)
        self.missing = missing


class StaleCacheError(CtrlBenchError, ValueError):
    """A cached analysis result no longer matches the current configuration."""


class CellExecutionError(CtrlBenchError, RuntimeError):
    """An episode failed; carries the (policy, seed, instance) coordinates."""

    def __init__(self, message: str, *, policy_id: str = "", seed: int = 0,
                 instance_id: str = "") -> None:
        super().__init__(
            f"{message} [policy={policy_id}, seed={seed}, instance={instance_id}]"
        )
        self.policy_id = policy_id
        self.seed = seed
        self.instance_id = instance_id
