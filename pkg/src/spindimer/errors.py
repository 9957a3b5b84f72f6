"""Exception types raised across the package."""


class SpinDimerError(Exception):
    """Base class for all package errors."""


class ValidationError(SpinDimerError, ValueError):
    """Bad user input: parameters, configs, sweep definitions."""


class NumericalGuard(SpinDimerError, ArithmeticError):
    """A numerical safety check tripped (overflow, non-finite result)."""


class NonHermitianInput(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonPositiveTemperature(ValidationError):
    pass


class NotAState(ValidationError):
    """Matrix fails the density-matrix gates (trace, Hermiticity)."""


class BracketInvalid(ValidationError):
    pass


class UnknownPreset(ValidationError):
    pass


class ConfigError(ValidationError):
    pass
