"""Exception types shared across the package."""


class UmatchError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(UmatchError, ValueError):
    """The caller violated a documented precondition (bad index, mismatched
    moduli, malformed input, ...)."""


class FieldMismatchError(UsageError):
    """Two operands belong to fields with different moduli."""


class DivisionByZeroError(UsageError, ZeroDivisionError):
    """Multiplicative inverse of zero was requested."""


class InternalInconsistencyError(UmatchError, RuntimeError):
    """A structural invariant that the library is responsible for was
    violated, e.g. a zero pivot inside a triangular solve."""
