"""Exception hierarchy shared across the package."""


class TSBlowfliesError(Exception):
    """Base class for all package errors."""


class NotInScale(TSBlowfliesError, ValueError):
    pass


class EmptyWindow(TSBlowfliesError, ValueError):
    pass


class NonRegressivePoint(TSBlowfliesError, ArithmeticError):
    pass


class InconsistentBounds(TSBlowfliesError, ArithmeticError):
    pass


class HistoryGap(TSBlowfliesError, LookupError):
    pass


class BlowUp(TSBlowfliesError, ArithmeticError):
    pass


class GridMismatch(TSBlowfliesError, ValueError):
    pass


class H2Violated(TSBlowfliesError, ArithmeticError):
    pass


class H5Violated(TSBlowfliesError, ArithmeticError):
    pass


class Infeasible(TSBlowfliesError, ArithmeticError):
    """Empty admissible interval for the lower invariant bound."""

    def __init__(self, lo, hi, message=None):
        self.lo = lo
        self.hi = hi
        super().__init__(message or f"infeasible interval: lo={lo!r} >= hi={hi!r}")


class RootBracketFailure(TSBlowfliesError, ArithmeticError):
    pass


class DegenerateSeries(TSBlowfliesError, ValueError):
    pass


class InsufficientOverlap(TSBlowfliesError, ValueError):
    pass


class ConfigError(TSBlowfliesError, ValueError):
    pass


class WindowEdgeWarning(UserWarning):
    """One-sided difference used because a neighbour fell outside the scale."""
