"""Exception types shared across the package."""


class FloqefError(Exception):
    """Base class for all floqef errors."""


class ConfigError(FloqefError, ValueError):
    """Invalid parameter set or malformed configuration input."""


class SingularSystem(FloqefError):
    """The retarded-resolvent solve failed; usually a gamma_tilde = 0 setup."""


class QuadratureNotConverged(FloqefError):
    """Energy quadrature error estimate exceeded the requested tolerance."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NotPositiveSemidefinite(FloqefError):
    """A matrix that must be PSD has an eigenvalue below the tolerance band."""


class ResidueCheckFailed(FloqefError):
    """A component that must vanish (imaginary or real residue) did not."""


class OutOfBounds(FloqefError):
    """A nuclear coordinate left the precomputed field grid."""

    def __init__(self, message, point=None, trajectory=None, time=None):
        super().__init__(message)
        self.point = point
        self.trajectory = trajectory
        self.time = time
