class CartanKitError(Exception):
    """Base class for every error raised by the cartankit apps."""


class DimensionMismatch(CartanKitError):
    pass


class SingularMatrix(CartanKitError):
    pass


class OffCell(CartanKitError):
    """The requested factorization does not exist (a leading block is singular).

    Callers that sample treat this as an expected outcome and discard the draw.
    """


class ClosureError(CartanKitError):
    """A matrix that should lie in the algebra does not re-expand in its basis."""
