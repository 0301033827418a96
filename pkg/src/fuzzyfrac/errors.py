"""Exception hierarchy shared by all fuzzyfrac modules."""


class FuzzyFracError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FuzzyFracError, ValueError):
    """An argument is outside the mathematically valid domain."""


class AccuracyError(FuzzyFracError):
    """The requested point lies outside the guaranteed accuracy domain.

    Raised instead of returning a silently wrong value.
    """


class GridMismatchError(FuzzyFracError, ValueError):
    """Two fuzzy numbers use different membership-level grids."""


class GHDifferenceError(FuzzyFracError):
    """Neither form of the generalized Hukuhara difference exists."""


class ExprError(FuzzyFracError):
    """Base class for expression language errors."""


class ParseError(ExprError):
    """Malformed expression source.

    Attributes:
        offset: byte offset into the source where parsing failed.
        expected: short description of what would have been accepted.
    """

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset
        self.expected = tuple(expected)


class EvalError(ExprError):
    """Numeric failure while evaluating an expression (domain/overflow)."""


class ScenarioError(FuzzyFracError, ValueError):
    """Invalid scenario description."""


class ConfigError(FuzzyFracError, ValueError):
    """Invalid configuration document.

    ``path`` is the location inside the document, e.g. ``scenario.noise.sigma``.
    """

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SolverError(FuzzyFracError):
    """Base class for integration failures."""


class OrderingViolation(SolverError):
    """A step produced interval endpoints that are no longer ordered/nested.

    Signals a right-hand side that is not order-preserving under the
    endpointwise convention; the solver refuses to continue rather than
    emit states that are not valid fuzzy numbers.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NonFiniteError(SolverError):
    """The trajectory blew up (NaN/inf detected)."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class UnsupportedMatrixError(FuzzyFracError, ValueError):
    """The matrix is not real-diagonalizable (or is too ill-conditioned)."""


class CertificateError(FuzzyFracError):
    """Base class for certificate construction failures."""


class NotHurwitz(CertificateError):
    """No positive-definite Lyapunov solution exists: the matrix has a
    non-decaying mode."""


class GainTooLarge(CertificateError):
    """The loop-gain product is >= 1; the small-gain certificate does not
    apply.  This is not a system failure."""


class ConverseNotApplicable(CertificateError):
    """Trajectories did not pass the empirical decay screen, so the
    truncated-integral construction would be meaningless."""
