"""Exception types shared across the package."""


class EffcapError(Exception):
    """Base class for all package errors."""


class DomainError(EffcapError):
    """Input outside the mathematical domain of an operation."""


class NumericError(EffcapError):
    """A computation could not be completed to the required accuracy."""


class ConfigError(EffcapError):
    """Invalid run configuration."""


class FitError(EffcapError):
    """A statistical fit could not be performed (e.g. empty tail)."""
