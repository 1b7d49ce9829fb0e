"""Exception types shared across the package.

Everything derives from :class:`PsqkdError` so callers (and the CLI) can
distinguish domain problems from programming errors with one except clause.
"""


class PsqkdError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PsqkdError, ValueError):
    """A parameter is outside its mathematically valid range."""


class InvalidStateError(PsqkdError):
    """A covariance matrix fails the physicality test."""


class SingularityError(PsqkdError):
    """An expression is evaluated at a removable or genuine singularity."""


class TruncationError(PsqkdError):
    """A Fock-space cutoff is too small for the requested tolerance."""


class ConditioningError(PsqkdError):
    """Conditioning on a (numerically) zero-probability measurement outcome."""


class EstimationError(PsqkdError):
    """Too little data to form the requested estimate."""


class DegenerateBlockError(PsqkdError):
    """A reconciliation block has (numerically) zero norm and defines no rotation."""
