"""Exception hierarchy shared across the package."""


class RobinholeError(Exception):
    """Base class for all package errors."""


# geometry
class DegenerateHole(RobinholeError):
    """Hole scale epsilon is not strictly positive."""


class HoleTouchesBoundary(RobinholeError):
    """Closure of the enclosing ball is not strictly inside the outer domain."""


class RadiusOutOfRange(RobinholeError):
    """Probe radius outside the admissible annulus (eps, 2*eps)."""


# mesh
class MeshFailure(RobinholeError):
    """Mesh generation cannot satisfy its quality or resolution contract."""


class MeshMismatch(RobinholeError):
    """Operation received functions or meshes from incompatible discretizations."""


# fem
class DegenerateTriangle(RobinholeError):
    """Element with (near-)zero area encountered during assembly."""


class NoHoleBoundary(RobinholeError):
    """Mesh carries no usable hole-tagged boundary edges."""


class NegativeForm(RobinholeError):
    """Quadratic form value turned negative (outside the gamma > 0 regime)."""


# eigensolve
class FactorizationFailure(RobinholeError):
    """Shifted matrix could not be factorized even after lowering the shift."""


class NoConvergence(RobinholeError):
    """Eigenvalue iteration did not converge within the restart bound."""


class ZeroVector(RobinholeError):
    """Residual check received an all-zero vector."""


# spectral metrics
class EmptySet(RobinholeError):
    """Set distance on an empty spectrum."""


class WindowMismatch(RobinholeError):
    """Spectrum windows with different caps cannot be compared."""


class InsufficientEigenvalues(RobinholeError):
    """Fewer eigenvalues available than requested for matching."""


class NonpositiveData(RobinholeError):
    """Log-log rate fit requires strictly positive data."""


# closeness lab
class TraceInterpolationFailure(RobinholeError):
    """A circle-trace sample point could not be located in the mesh."""


class GridExhausted(RobinholeError):
    """No grid radius satisfied the annulus mean-value bound.

    Carries the minimizing radius and its energy ratio for reporting.
    """

    def __init__(self, msg, best_radius=None, best_ratio=None):
        super().__init__(msg)
        self.best_radius = best_radius
        self.best_ratio = best_ratio


class EmptyTestSet(RobinholeError):
    """Certification invoked with no test functions."""


# oracle
class RootBracketFailure(RobinholeError):
    """Sign scan failed to bracket a requested dispersion-relation root."""


class MissedRootWarning(UserWarning):
    """Eigenvalue count deviates from the Weyl-asymptotic expectation."""


# experiments
class ConfigError(RobinholeError):
    """Invalid experiment configuration."""


class FatalConfig(ConfigError):
    """Configuration violates the theorem-regime gate."""
