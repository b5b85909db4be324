"""Exception hierarchy shared across the toolkit.

CLI exit codes: validation problems map to 2, numerical failures to 3,
OS-level I/O failures to 4 (the latter are plain OSError and not wrapped).
"""

from __future__ import annotations


class LinkexprError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(LinkexprError):
    """Bad input: contract violation, malformed file, invalid configuration."""


class ParseError(ValidationError):
    """Malformed document; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ExactSearchRefused(ValidationError):
    """Exact automorphism search refused (node cap or group-size cap)."""


class PartialDatasetError(LinkexprError):
    """Generation ran out of attempts; carries the count achieved."""

    def __init__(self, message: str, achieved: int):
        super().__init__(message)
        self.achieved = achieved


class NumericalError(LinkexprError):
    """Numerical failure in statistical routines."""


class SingularCovarianceError(NumericalError):
    """Sample covariance is singular within tolerance."""


class DegreesOfFreedomError(NumericalError):
    """Not enough samples for the requested dimensionality (q <= d)."""


class FingerprintCollisionError(LinkexprError):
    """Two distinct canonical forms produced the same 128-bit digest."""
