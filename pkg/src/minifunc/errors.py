"""Exception hierarchy shared across the package.

Every error raised by the library derives from MinifuncError so callers
(and the CLI exit-code mapping) can distinguish our failures from bugs.
"""

from __future__ import annotations

__all__ = [
    "MinifuncError",
    "InputFormatError",
    "ConfigurationError",
    "FunctionalDomainError",
    "SupportError",
    "NumericalError",
]


class MinifuncError(Exception):
    """Base class for all library errors."""


class InputFormatError(MinifuncError, ValueError):
    """Malformed external input (histogram CSV, sample file, phi spec)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigurationError(MinifuncError, ValueError):
    """A parameter is outside its documented domain."""


class FunctionalDomainError(MinifuncError, ValueError):
    """phi or one of its derivatives was evaluated where it is not finite."""


class SupportError(MinifuncError, ValueError):
    """Divergence undefined because the supports are incompatible."""


class NumericalError(MinifuncError, RuntimeError):
    """A numeric procedure failed (solver divergence, infeasible program,
    truncated tail too heavy, non-finite intermediate)."""
