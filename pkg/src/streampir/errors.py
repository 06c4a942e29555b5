"""Exception types shared across the package."""


class FieldMismatchError(ValueError):
    """Operands belong to different field specs."""


class BudgetExceededError(RuntimeError):
    """An enumeration guard was hit before the computation could finish."""


class SearchExhaustedError(RuntimeError):
    """Randomized code search ran out of attempts."""

    def __init__(self, message: str, attempts: int = 0, stats: dict | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.stats = stats or {}


class CorruptedStreamError(RuntimeError):
    """Received symbols are inconsistent with any codeword: corruption, not
    erasure, which this pipeline does not attempt to repair."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
