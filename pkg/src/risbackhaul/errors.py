"""Exception types raised across the package."""


class RisBackhaulError(Exception):
    """Base class for all package errors."""


class InvalidInput(RisBackhaulError, ValueError):
    """An argument is outside the domain an operation accepts."""


class NumericalFailure(RisBackhaulError, ArithmeticError):
    """A linear-algebra kernel could not produce a trustworthy result."""


class ConfigError(InvalidInput):
    """A run configuration is malformed or out of range."""
