"""Exception types raised across the package."""


class AquariumError(Exception):
    """Base class for all package errors."""


class GeometryError(AquariumError, ValueError):
    """Invalid boundary description (orientation, collinearity, self-intersection)."""


class GridTooCoarse(AquariumError):
    """Critical points of a boundary functional are closer than the sampling grid resolves."""


class NotLambdaSimple(AquariumError):
    """The boundary is not lambda-simple, so the involutions are undefined."""


class CornerHit(AquariumError):
    """A polygon level line passes through a vertex."""


class PeriodicCornerOrbit(AquariumError):
    """An orbit keeps hitting polygon vertices after repeated perturbation."""


class ResonantDivisor(AquariumError, ZeroDivisionError):
    """Small divisor 1 - exp(2 pi i k alpha) vanished for an active Fourier mode."""


class NonmonotoneResult(AquariumError):
    """A computed circle conjugacy failed to be strictly increasing."""


class DivergenceDetected(AquariumError):
    """KAM residual increased on two consecutive iterations."""


class QuadratureNotConverged(AquariumError):
    """Panel doubling did not reach the requested tolerance."""


class DomainError(AquariumError, ValueError):
    """Argument outside the domain of a special function."""


class OriginSingularity(AquariumError, ValueError):
    """Fundamental solution evaluated at the origin."""


class SupportTouchesBoundary(AquariumError, ValueError):
    """Forcing support is not contained strictly inside the domain."""


class SingularSystem(AquariumError):
    """Boundary integral system is numerically singular."""

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class TooCloseToBoundary(AquariumError, ValueError):
    """Interior evaluation point lies too close to the boundary."""


class ConfigError(AquariumError, ValueError):
    """Run configuration failed schema validation."""
