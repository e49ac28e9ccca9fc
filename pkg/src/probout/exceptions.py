"""Exception types shared across the package."""


class ProboutError(Exception):
    """Base class for all package errors."""


class InputError(ProboutError, ValueError):
    """Invalid argument shape, range or combination."""


class DataError(ProboutError, ValueError):
    """A data file could not be parsed."""


class FitError(ProboutError, ArithmeticError):
    """A distance distribution could not be fitted to the given values."""
