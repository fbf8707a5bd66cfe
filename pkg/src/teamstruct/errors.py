"""Exception types shared across the package."""


class TeamstructError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TeamstructError, ValueError):
    """An input violates a documented precondition or invariant."""


class SchemaError(InvalidInputError):
    """A problem file failed validation; the message carries the field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class NoUniqueSolutionError(TeamstructError, RuntimeError):
    """A stationarity system is numerically singular or ill-conditioned."""

    def __init__(self, message: str, condition: float | None = None,
                 modification=None):
        super().__init__(message)
        self.condition = condition
        self.modification = modification


class TooLargeError(InvalidInputError):
    """A combinatorial enumeration exceeds the built-in guard."""
