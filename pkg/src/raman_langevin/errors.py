"""Exception hierarchy shared by the simulator modules."""


class RamanLangevinError(Exception):
    """Base class for all simulator errors."""


class ConfigError(RamanLangevinError, ValueError):
    """Invalid, incomplete or malformed configuration.

    ``key`` names the offending configuration key when there is a single one;
    ``keys`` lists all of them (e.g. every missing required key).
    """

    def __init__(self, message, key=None, keys=()):
        super().__init__(message)
        self.key = key
        self.keys = tuple(keys) if keys else ((key,) if key else ())


class ConvergenceError(RamanLangevinError):
    """Steady-state iteration failed to reach the requested tolerance."""

    def __init__(self, message, residual_norm=float("nan"), iterations=0):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class SingularJacobianError(ConvergenceError):
    """Newton Jacobian could not be factorised at an iterate."""


class IntegrationError(RamanLangevinError):
    """A time integrator failed to complete (step-size collapse)."""


class InstabilityError(RamanLangevinError):
    """The drift matrix has an eigenvalue with non-negative real part."""

    def __init__(self, message, max_real=float("nan")):
        super().__init__(message)
        self.max_real = max_real


class PropagatorOverflowError(InstabilityError, OverflowError):
    """exp(A t) would overflow because A has a growing mode."""


class G2UndefinedError(RamanLangevinError, ZeroDivisionError):
    """g2(0) requested for a mode with (numerically) zero photon number."""


class NonPhysicalCovarianceError(RamanLangevinError, ValueError):
    """A covariance matrix violates the uncertainty principle."""

    def __init__(self, message, violation=0.0):
        super().__init__(message)
        self.violation = violation
