"""Exception types shared across the package."""


class FlagDynError(Exception):
    """Base class for all package errors."""


class InvalidArgument(FlagDynError, ValueError):
    pass


class CapacityError(FlagDynError):
    """A combinatorial or memory guard was exceeded."""


class DecompositionError(FlagDynError, ArithmeticError):
    """A matrix factorization failed or the input was numerically singular."""


class AmbiguityError(FlagDynError):
    """Two incompatible answers were found; both are attached."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class ConfigError(FlagDynError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
