"""Mean-curvature-type Dirichlet problems on strictly convex planar
domains: geometry, meshing, a damped-Newton P1 solver, radial oracles
and theorem-level verification."""

__version__ = "0.1.0"

from .geometry import Ellipse, FourierCurve  # noqa: F401
from .problems import ConstantForcing, PowerMC  # noqa: F401
