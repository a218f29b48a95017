"""Exception types raised by the calibration toolkit."""


class CalibrationError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(CalibrationError, ValueError):
    """Array shapes do not conform."""


class DataError(CalibrationError, ValueError):
    """Input data is invalid (NaN/Inf, out-of-range temperature, bad ordering)."""


class IllConditionedError(CalibrationError, ArithmeticError):
    """Normal equations are (near) singular.

    The reciprocal condition estimate is kept on ``rcond`` so callers can
    report how degenerate the data was.
    """

    def __init__(self, message, rcond=0.0):
        super().__init__(message)
        self.rcond = rcond


class DegenerateGeometryError(CalibrationError, ValueError):
    """Force points do not span enough of the sphere to fit a center."""


class UndefinedBaselineError(CalibrationError, ZeroDivisionError):
    """A percentage reduction was requested against a zero baseline."""
