"""Semantic exception hierarchy.

Every error raised by this package derives from :class:`HardyboxError`, so
callers can distinguish domain problems (bad arguments, divergent integrals)
from ordinary Python failures.
"""

from __future__ import annotations


class HardyboxError(Exception):
    """Base class for all package errors."""


class DomainError(HardyboxError, ValueError):
    """An argument lies outside the domain a routine can handle."""


class RangeError(HardyboxError, ValueError):
    """An inverse-evaluation target is outside the achievable range."""


class IntegrabilityError(HardyboxError, ValueError):
    """An integral diverges at the singular endpoint 0.

    The message names the offending exponent (or the empirical decay rate for
    sampled weights) so configuration errors are actionable.
    """


class AccuracyError(HardyboxError, RuntimeError):
    """Quadrature failed to converge within its subdivision budget.

    Carries the best estimate obtained so far in ``best_estimate``.
    """

    def __init__(self, message: str, best_estimate: float | None = None):
        super().__init__(message)
        self.best_estimate = best_estimate


class ExtrapolationError(HardyboxError, RuntimeError):
    """A limit extrapolation received a non-monotone or diverging sequence.

    The raw sequence is attached as ``raw_values``.
    """

    def __init__(self, message: str, raw_values=None):
        super().__init__(message)
        self.raw_values = list(raw_values) if raw_values is not None else []


class CoverageError(HardyboxError, ValueError):
    """A partition sequence fails to cover a required interval."""


class ConfigError(HardyboxError, ValueError):
    """A configuration file failed to parse or validate."""
