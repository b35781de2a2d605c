"""Exception hierarchy shared by all bfbm modules."""


class BfbmError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BfbmError, ValueError):
    """Parameter or argument outside the range where a formula is defined."""


class PoleError(DomainError):
    """Argument sits on a pole of the gamma function."""


class ConvergenceError(BfbmError, ArithmeticError):
    """A series did not reach its tolerance within the allowed number of terms."""


class QuadratureError(ConvergenceError):
    """Numerical integration failed its self-consistency check."""


class ScanError(BfbmError, ArithmeticError):
    """A grid scan produced non-finite values."""


class NonMonotoneError(BfbmError):
    """The single-crossing assumption behind a bisection was contradicted."""


class NumericalError(BfbmError, ArithmeticError):
    """A linear-algebra routine failed."""


class NotPSDError(NumericalError):
    """Cholesky factorization failed even after the full jitter ladder.

    ``index`` is the 1-based order of the leading minor that failed.
    """

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class TruncationError(BfbmError, ArithmeticError):
    """A truncated series omits more variance than allowed."""
