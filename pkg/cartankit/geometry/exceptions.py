from cartankit.algebra.exceptions import CartanKitError


class ChartError(CartanKitError):
    """Point at infinity of the affine chart that was asked for."""


class UncoveredPoint(CartanKitError):
    def __init__(self, point, message=None):
        self.point = point
        super().__init__(message or f"No symmetry assigned to {point}")


class NoOriginSymmetry(CartanKitError):
    pass


class PreconditionError(CartanKitError):
    pass


class SampleExhaustion(CartanKitError):
    def __init__(self, requested, discarded):
        self.requested = requested
        self.discarded = discarded
        super().__init__(f"Gave up after {discarded} off-cell draws for {requested} samples")


class DrawRejected(CartanKitError):
    """A sampled value the sampler itself refuses (filtered out, zero vector, wrong stratum)."""
