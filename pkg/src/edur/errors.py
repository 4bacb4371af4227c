"""Exception types shared across the package."""


class EdurError(Exception):
    """Base class for all errors raised by edur."""


class InvalidInput(EdurError, ValueError):
    """Input violates a documented precondition (shape, hermiticity, range...)."""


class DimensionError(InvalidInput):
    """Operand dimensions do not match."""


class NumericFailure(EdurError, ArithmeticError):
    """A computed quantity left its admissible range beyond tolerance."""
