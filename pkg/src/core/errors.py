"""
Exception hierarchy for maxpot.

All errors derive from ``MaxPotError`` which is itself a ``ValueError``, so
code that only cares about "bad input" can keep catching ``ValueError``.
"""

from typing import Optional


class MaxPotError(ValueError):
    """Base class for every error raised by the package."""


class DomainError(MaxPotError):
    """An argument lies outside the mathematical domain of an operation."""


class ZeroMeanError(MaxPotError):
    """A degree -n kernel was built from a symbol without zero mean."""


class CatalogError(MaxPotError):
    """Unknown catalog id or catalog parameters outside their validity range."""


class ConfigError(MaxPotError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str, path: Optional[str] = None):
        self.field = field
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"{field}: {message}{where}")


class NumericalError(MaxPotError):
    """NaN or Inf detected in a field or operator output."""


class OracleError(MaxPotError):
    """No analytic or reference value is registered for a configuration."""
