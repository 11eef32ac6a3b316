"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ``InvalidInputError`` -> 2,
``NumericalError`` -> 3, ``CapExceededError`` -> 4.
"""


class TeichEntropyError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(TeichEntropyError, ValueError):
    """Malformed or out-of-domain input."""


class ReduciblePermutationError(InvalidInputError):
    pass


class InadmissibleWordError(InvalidInputError):
    """A word whose consecutive letters are not joined by an edge."""


class NumericalError(TeichEntropyError, ArithmeticError):
    """Numeric or divergence failure."""


class BoundaryError(NumericalError):
    """The point lies on a measure-zero set where the induction is undefined."""


class CapExceededError(TeichEntropyError, RuntimeError):
    """A bounded search ran out of budget."""


class RecurrenceNotObservedError(CapExceededError):
    pass
