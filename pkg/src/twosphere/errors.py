"""Exception hierarchy for the two-sphere field package."""


class TwoSphereError(Exception):
    """Base class for all errors raised by this package."""


class NonPositiveGeometry(TwoSphereError, ValueError):
    pass


class SingularPoint(TwoSphereError, ValueError):
    pass


class TruncationOverflow(TwoSphereError, RuntimeError):
    pass


class ConvergenceFailure(TwoSphereError, RuntimeError):
    pass


class ParseError(TwoSphereError, ValueError):
    pass


class NonHarmonic(TwoSphereError, ValueError):
    """Raised for a polynomial whose Laplacian does not vanish.

    ``residual`` holds the Laplacian as a polynomial object.
    """

    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"Δ = {residual}")


class PointInsideInclusion(TwoSphereError, ValueError):
    pass


class OutsideGapRegion(TwoSphereError, ValueError):
    pass


class QuadratureFailure(TwoSphereError, RuntimeError):
    pass


class UnsupportedOrder(TwoSphereError, ValueError):
    pass


class DegenerateFit(TwoSphereError, ValueError):
    pass
