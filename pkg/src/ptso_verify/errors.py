"""Shared analysis exceptions."""


class OracleUnknownError(RuntimeError):
    """Strict-mode reachability answer was Unknown (exploration bound hit)."""


class BudgetExceededError(RuntimeError):
    """Analysis resource budget exhausted; carries the partial result."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
