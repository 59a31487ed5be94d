"""Exception types shared across the package."""

from __future__ import annotations


class SrdeError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SrdeError, ValueError):
    """A precondition on an argument was violated."""


class NonFiniteSampleError(SrdeError, ValueError):
    """A sampled function value was NaN or infinite."""


class GridMismatchError(SrdeError, ValueError):
    """Two objects that must share a grid do not."""


class BlowUpError(SrdeError, ArithmeticError):
    """A field produced a non-finite value during time stepping."""


class QuadratureError(SrdeError, ArithmeticError):
    """A quadrature stencil hit a non-finite integrand value."""


class HorizonError(SrdeError, ValueError):
    """A requested horizon exceeds the admissible one for the weight."""


class InsufficientLagsError(SrdeError, ValueError):
    """A scaling fit was requested with too few lags."""


class ConfigError(SrdeError, ValueError):
    """A run configuration is malformed; the message names the field."""
