"""
Exception hierarchy for peakonlab.
Every failure raised by the library derives from LabError so callers can catch one type.
"""
from typing import Optional


class LabError(Exception):
    """Base class for all peakonlab errors."""


class ConfigurationError(LabError):
    """Invalid grid, norm, or parameter choice."""


class FieldError(LabError):
    """A Field violates its invariants (length or finiteness)."""


class SamplingError(FieldError):
    """A sampled function produced NaN or infinity at some node."""


class OperatorError(LabError):
    """Spectral operator misuse: grid mismatch, cost guard, bad derivative order."""


class DynamicsError(LabError):
    """Non-finite values while evaluating a right-hand side."""


class NumericalFailureError(LabError):
    """A Runge-Kutta stage produced non-finite values."""


class DomainError(LabError):
    """A scale function was evaluated outside its domain (log t < 1)."""


class InsufficientDataError(LabError):
    """Too few samples, or too short a time span, for a fit."""


class ParseError(LabError):
    """Config text could not be turned into a RunConfig."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        parts = []
        if key is not None:
            parts.append(f"key '{key}'")
        if line is not None:
            parts.append(f"line {line}")
        location = f" ({', '.join(parts)})" if parts else ""
        super().__init__(f"{message}{location}")
