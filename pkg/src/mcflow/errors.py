"""Exception types shared across the package."""


class McflowError(Exception):
    """Base class for all package-specific errors."""


class DegenerateTangent(McflowError):
    """Boundary curve velocity vanished at a parameter value."""


class NonConvex(McflowError):
    """A sampled boundary curvature was not strictly positive."""


class MeshQualityFailure(McflowError):
    """Triangulation could not meet the minimum-angle requirement."""


class UnknownVertex(McflowError):
    """Vertex id outside the mesh."""


class NonConvergence(McflowError):
    """Newton iteration failed to reach the residual tolerance.

    Carries the iteration trace so the caller can distinguish a
    too-coarse mesh from a problem that may simply have no classical
    solution on the given domain.
    """

    def __init__(self, iterations, final_residual, trace=None):
        self.iterations = iterations
        self.final_residual = final_residual
        self.trace = trace or []
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(residual {final_residual:.3e})"
        )


class InterpolationOutsideDomain(McflowError):
    """A normal-line sample point left the triangulated region."""


class AlphaOne(McflowError):
    """The gradient-power auxiliary function is undefined at alpha = 1."""


class NoCriticalPoint(McflowError):
    """No interior vertex passed the small-gradient threshold."""


class SlopeBlowup(McflowError):
    """Radial slope exceeded the blow-up cap before reaching the rim."""

    def __init__(self, r):
        self.r = r
        super().__init__(f"radial slope blew up at r = {r:.6g}")


class ConfigError(McflowError):
    """Invalid run configuration; message names the offending field."""
