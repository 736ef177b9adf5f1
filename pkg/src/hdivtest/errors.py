"""Exception types raised by hdivtest."""


class IVTestError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateStatisticError(IVTestError):
    """A test statistic is undefined for the given residuals."""


class ZeroDenominatorError(DegenerateStatisticError):
    """The variance estimate in a quadratic statistic is exactly zero."""


class AllDegenerateError(DegenerateStatisticError):
    """Every instrument column has zero estimated score variance."""


class KTooSmallError(IVTestError, ValueError):
    """The Gumbel calibration needs at least two instruments."""


class SingularMatrixError(IVTestError, ValueError):
    """``Z'Z`` is singular and no ridge penalty was supplied."""


class DegenerateDirectionError(IVTestError, ValueError):
    """The first-stage direction has zero variance but a positive signal was requested."""


class DataError(IVTestError, ValueError):
    """Problem with an input data file."""


class ParseError(DataError):
    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", column {col!r})" if col is not None else ")")
        super().__init__(message + where)


class MissingColumnError(DataError):
    pass


class NonFiniteValueError(ParseError):
    pass
