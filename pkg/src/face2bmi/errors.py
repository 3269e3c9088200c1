"""Exception types shared across the pipeline.

Two families matter for scripting: InputError covers everything the caller
can fix (bad values, malformed files, broken preconditions) and maps to
exit code 1; AlgorithmError covers honest algorithmic failure (solver did
not converge, sampling pool too small) and maps to exit code 2.
"""


class Face2BmiError(Exception):
    """Base class for all errors raised by this package."""


class InputError(Face2BmiError):
    """Caller-fixable problem with inputs, files, or preconditions."""


class DomainError(InputError):
    """Scalar input outside its admissible range."""


class ValidationError(InputError):
    """Structured input violates a contract (dims, flags, preconditions)."""


class ParseError(InputError):
    """Malformed text input; message carries the offending line number."""


class IntegrityError(InputError):
    """Duplicate or conflicting keys in supposedly unique data."""


class FormatError(InputError):
    """File does not match its declared binary or JSON format."""


class CorruptionError(FormatError):
    """File matches the format header but its payload is inconsistent."""


class UndefinedCorrelationError(InputError):
    """Correlation requested on a zero-variance sequence."""


class AlgorithmError(Face2BmiError):
    """The algorithm could not meet its contract on valid input."""


class ConvergenceError(AlgorithmError):
    """Solver exhausted its iteration budget.

    Carries the final maximum KKT violation so callers can judge how far
    from optimal the run stopped.
    """

    def __init__(self, message: str, kkt_violation: float):
        super().__init__(message)
        self.kkt_violation = kkt_violation


class CapacityError(AlgorithmError):
    """A sampling pool cannot supply the requested number of items."""
