"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class HubbardAdaptError(Exception):
    """Base class for all package errors."""


class ValidationError(HubbardAdaptError, ValueError):
    """Input violates a documented precondition."""


class ResourceError(HubbardAdaptError):
    """Requested problem size exceeds the dense-simulation guard."""


class UnsupportedGeometryError(ValidationError):
    """Operation is only defined for a restricted lattice geometry."""


class DegeneracyError(HubbardAdaptError):
    """A degenerate level makes the requested quantity ambiguous."""


class ConfigError(ValidationError):
    """Run configuration is invalid or inconsistent."""


class NumericalError(HubbardAdaptError, ArithmeticError):
    """Non-finite values or other numerical breakdown."""

    def __init__(self, message: str, x=None):
        super().__init__(message)
        self.x = x
