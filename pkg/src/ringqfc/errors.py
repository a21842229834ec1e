"""Exception and warning types raised across the package."""


class RingQfcError(Exception):
    """Base class for all package errors."""

    kind = "error"


class InsufficientDataError(RingQfcError):
    kind = "insufficient-data"


class SingularFitError(RingQfcError):
    kind = "singular-fit"


class NoResonanceError(RingQfcError):
    kind = "no-resonance"


class FitFailureError(RingQfcError):
    kind = "fit-failure"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AccuracyError(RingQfcError):
    kind = "accuracy"


class UnsupportedConfigurationError(RingQfcError):
    kind = "unsupported-configuration"


class ConsistencyError(RingQfcError):
    kind = "internal-consistency"


class UndefinedCarError(RingQfcError):
    kind = "undefined-car"


class ConfigError(RingQfcError):
    """Bad scenario configuration; ``line`` is 1-based when known."""

    kind = "config"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StatisticsWarning(UserWarning):
    """Monte Carlo run too short for the requested statistical power."""


class ClampWarning(UserWarning):
    """A constrained fit hit a non-negativity bound."""
