"""Exception types shared across the package."""


class AuxModeError(Exception):
    """Base class for every error raised on purpose by auxmode."""


class DataError(AuxModeError, ValueError):
    """Input data is malformed or unusable (bad CSV, too few units, ...)."""


class ModelBreakdownError(AuxModeError, ArithmeticError):
    """A first-order formula left its domain, e.g. a negative variance."""


class DegenerateDenominatorError(ModelBreakdownError):
    """A ratio-type estimator hit a zero or sign-flipped denominator."""
