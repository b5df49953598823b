"""Exception hierarchy.

Errors split into two families: numerical failures raised by the jet and
operator machinery, and domain errors raised when a requested state or
spectrum violates the model's parameter/index rules. The CLI maps
``DomainError`` to exit code 3.
"""


class Scarf2DError(Exception):
    """Base class for all package errors."""


class PoleError(Scarf2DError, ArithmeticError):
    """A jet was expanded on a singularity of an elementary function."""


class DivisionByZero(PoleError, ZeroDivisionError):
    pass


class OrderExceeded(Scarf2DError, IndexError):
    pass


class RecurrenceBreakdown(Scarf2DError, ArithmeticError):
    pass


class IllConditioned(Scarf2DError, ArithmeticError):
    pass


class DomainError(Scarf2DError, ValueError):
    """Requested object is outside the model's admissible parameters."""


class IndexOutOfBoundState(DomainError):
    pass


class DegenerateAntisymmetric(DomainError):
    pass


class SelectionRuleViolated(DomainError):
    pass


class RegionError(DomainError):
    pass


class ResonanceError(DomainError):
    pass


class ChainDepthExceeded(DomainError):
    pass
