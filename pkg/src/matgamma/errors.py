"""Exception types raised across the package."""


class MatGammaError(Exception):
    """Base class for package errors."""


class DomainError(MatGammaError, ValueError):
    """Argument outside the domain where a quantity is defined."""


class PoleError(DomainError):
    """A lower hypergeometric parameter hits a pole of the Pochhammer symbol."""


class DivergenceError(MatGammaError, ArithmeticError):
    """A series or integral diverges at the requested argument."""


class InvalidModelError(MatGammaError, ValueError):
    """Model parameters do not define a valid distribution."""


class DimensionError(MatGammaError, ValueError):
    """Incompatible matrix shapes."""


class TableExhaustedError(MatGammaError, LookupError):
    """Requested partition weight exceeds a precomputed table."""
