"""Exception hierarchy shared by every module.

The CLI maps each family onto an exit status, so new errors should subclass
one of the three leaves below rather than ``PenregError`` directly.
"""


class PenregError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(PenregError, ValueError):
    """Bad input: wrong shapes, non-finite entries, violated preconditions."""

    exit_code = 2


class DegenerateColumnError(ValidationError):
    """A design column has zero variance (or zero norm) where it must not."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"column {column!r} is degenerate (zero variance)")


class SizeLimitError(ValidationError):
    """The requested computation exceeds a hard size limit."""


class PreconditionError(ValidationError):
    """A mathematical precondition of the requested operation does not hold."""


class NumericalError(PenregError, ArithmeticError):
    """A numerical routine failed (non-convergence, singular update)."""

    exit_code = 3


class SingularityError(NumericalError):
    """A rank-one update would divide by a (numerically) zero quantity."""


class InputOutputError(PenregError, OSError):
    """Reading or writing a file failed."""

    exit_code = 4
