"""Exception types shared across the package.

Exit-code mapping used by the CLI: ValidationError -> 2,
TruncationError -> 3, CheckFailure -> 4.
"""


class MirrorGWError(Exception):
    """Base class for package errors."""


class ValidationError(MirrorGWError):
    """Invalid input data (bad orbifold integers, out-of-range indices, ...)."""


class TruncationError(MirrorGWError):
    """A series window was too small for the requested computation."""


class CheckFailure(MirrorGWError):
    """A verification suite found a deviation above tolerance."""
