"""Exception and warning types shared across the package."""


class KdtliError(Exception):
    """Base class for all errors raised by :mod:`kdtli`."""


class DomainError(KdtliError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SingularOrientationError(DomainError):
    """Euler-angle coordinate singularity (sin(theta) == 0) with nonzero load."""


class NonHermitianError(DomainError):
    """A matrix expected to be Hermitian is not; ``asymmetry`` is max |A - A^H|."""

    def __init__(self, asymmetry):
        super().__init__(f"matrix is not Hermitian: max |A - A^H| = {asymmetry:.3g}")
        self.asymmetry = asymmetry


class TruncationError(KdtliError):
    """A truncated expansion failed its completeness criterion."""


class QuadratureError(KdtliError):
    """A numerical integral failed to converge.

    Attributes
    ----------
    estimate : float
        Best available value of the integral.
    error : float
        Achieved error estimate.
    """

    def __init__(self, message, estimate=float("nan"), error=float("nan")):
        super().__init__(f"{message} (estimate={estimate:.6g}, error={error:.3g})")
        self.estimate = estimate
        self.error = error


class ConfigError(KdtliError, ValueError):
    """A run configuration could not be parsed into valid parameter records."""


class TruncationWarning(UserWarning):
    """A truncated series lost more norm than expected, but not fatally."""
