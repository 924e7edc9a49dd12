"""Exception and warning classes shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ConfigError(ValueError):
    """A configuration value is invalid or unknown."""


class NumericalError(FloatingPointError):
    """Training produced a non-finite value."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state or {}


class SimilarityRangeWarning(UserWarning):
    """A toy-scenario similarity lies outside the usual [0, 1] range."""
