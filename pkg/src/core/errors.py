"""Exception hierarchy for the QSHI teleportation simulator."""

from typing import Optional


class QshiError(Exception):
    """Base class for every error raised by the simulator."""


class DimensionError(QshiError):
    """A state or projector has the wrong number of amplitudes or subsystems."""


class NotNormalizedError(QshiError):
    """An operation that requires a normalized state received one that is not."""


class DegenerateStateError(QshiError):
    """A two-particle amplitude set (or a selected column of it) vanishes."""


class ZeroProbabilityError(DegenerateStateError):
    """Attempt to normalize or correct a measurement branch that never occurs."""


class UnitarityError(QshiError):
    """A junction violates |t|^2 + |p|^2 + |f|^2 = 1."""


class ConstraintViolationError(QshiError):
    """Bob's feed-forward row or the geometric congruence is not satisfied."""


class ConfigError(QshiError):
    """Base class for run configuration problems."""


class ParseError(ConfigError):
    """A config file line or value cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        context = []
        if line is not None:
            context.append(f"line {line}")
        if key:
            context.append(f"key '{key}'")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)


class ValidationError(ConfigError):
    """A parsed config value violates an invariant."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
