"""Exception types shared across the package."""


class LindbladBoundsError(Exception):
    """Base class for all package-specific errors."""


class WindowTooLarge(LindbladBoundsError):
    """A ket-bra window does not fit into the requested level."""


class NonPositiveCoupling(LindbladBoundsError):
    """The quantum contact process requires omega > 0."""


class DegenerateTolerance(LindbladBoundsError):
    """The null-space tolerance does not separate zero from nonzero spectrum."""


class EmptyObjective(LindbladBoundsError):
    """An objective with no terms was supplied to a problem builder."""


class NonHermitianObjective(LindbladBoundsError):
    """Objectives must be Hermitian so that the bound is real."""


class NegativeDelta(LindbladBoundsError):
    """The decay-rate parameter of the gap problem must be >= 0."""


class BracketFailure(LindbladBoundsError):
    """A root/bisection bracket does not contain a sign change."""


class TooLarge(LindbladBoundsError):
    """Dense-oracle construction was requested for too many sites."""


class IoFailure(LindbladBoundsError):
    """A file could not be written or read."""


class ParseError(LindbladBoundsError):
    """Observable text could not be parsed.

    Carries the 1-based column of the offending character.
    """

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class SiteOutOfRange(LindbladBoundsError):
    """An observable references a site outside the window 1..N."""


class PrecisionWarning(UserWarning):
    """Navigator values are too close to solver noise to be trusted."""
