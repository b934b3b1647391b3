"""Exception and warning types shared across the package."""

import math

#: Sentinel returned where a PIE or divergence is unbounded (e.g. zero noise).
INFINITE = math.inf


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class NearFieldWarning(UserWarning):
    """Diffraction transmission above one: far-field formula out of validity."""


class TruncationError(ArithmeticError):
    """A count distribution could not be truncated within the hard index cap."""


class ObjectiveError(ArithmeticError):
    """An optimization objective returned NaN."""


def is_infinite(x):
    return isinstance(x, float) and math.isinf(x) and x > 0
