"""Exception hierarchy shared by every module."""


class AdicError(Exception):
    """Base class for all package errors."""


class PreconditionError(AdicError, ValueError):
    """An argument violates a documented precondition."""


class OrderPreconditionError(PreconditionError):
    """The supplied exponent bound is not a multiple of the true order."""


class InvalidPairError(PreconditionError):
    """(m, n) is not a coprime pair with m > n >= 2."""

    def __init__(self, message, hint=None):
        super().__init__(message if hint is None else f"{message}; {hint}")
        self.reason = message
        self.hint = hint


class CapExceededError(AdicError, RuntimeError):
    """A brute-force search hit its iteration cap."""


class InconclusiveError(AdicError, RuntimeError):
    """A finite check could not decide within its budget (not a falsification)."""


class InternalConsistencyError(AdicError, RuntimeError):
    """A computed object contradicts a proved identity; indicates a bug or a false claim."""


class WeightFormatError(AdicError, ValueError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column
