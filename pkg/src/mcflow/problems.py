"""Problem descriptors for the two Dirichlet problems.

Both equations share the minimal-surface-type divergence term
div(grad(u)/w) with w = sqrt(1 + |grad(u)|^2); they differ in the
right-hand side g(w):

    PowerMC(alpha):         g(w) = w^(-alpha)
    ConstantForcing(mu):    g(w) = 1/w + mu
"""

from dataclasses import dataclass

from .errors import ConfigError

# integer tags used by the assembly / ODE kernels
KIND_POWER = 0
KIND_FORCING = 1


@dataclass(frozen=True)
class PowerMC:
    """Power-of-slope right-hand side. alpha = 1 is the translating
    soliton case; the solver accepts it but the Phi auxiliary function
    is undefined there."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")

    @property
    def is_soliton(self):
        return abs(self.alpha - 1.0) < 1e-12


@dataclass(frozen=True)
class ConstantForcing:
    """Soliton equation plus a constant forcing mu > 0."""

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError("mu must be positive")


def kernel_tag(problem):
    """(kind, parameter) pair consumed by the compiled/fallback kernels."""
    if isinstance(problem, PowerMC):
        return KIND_POWER, problem.alpha
    if isinstance(problem, ConstantForcing):
        return KIND_FORCING, problem.mu
    raise TypeError(f"not a problem spec: {problem!r}")


def forcing_term(problem, w):
    """g(w), vectorized over w."""
    if isinstance(problem, PowerMC):
        return w ** -problem.alpha
    return 1.0 / w + problem.mu


def forcing_derivative(problem, w):
    """dg/dw, vectorized over w."""
    if isinstance(problem, PowerMC):
        return -problem.alpha * w ** (-problem.alpha - 1.0)
    return -1.0 / (w * w)


def scaled(problem, factor):
    """Problem with its parameter ramped by ``factor`` in [0, 1];
    used for parameter continuation from the flat state."""
    if isinstance(problem, PowerMC):
        # alpha -> 0 is the constant-curvature end of the family
        return PowerMC(alpha=max(problem.alpha * factor, 1e-12))
    return ConstantForcing(mu=max(problem.mu * factor, 1e-12))


def to_dict(problem):
    if isinstance(problem, PowerMC):
        return {"kind": "power_mc", "alpha": problem.alpha}
    return {"kind": "constant_forcing", "mu": problem.mu}


def from_dict(data):
    try:
        kind = data["kind"]
    except (TypeError, KeyError):
        raise ConfigError("problem: missing 'kind'") from None
    if kind == "power_mc":
        if "alpha" not in data:
            raise ConfigError("problem: power_mc needs 'alpha'")
        return PowerMC(alpha=float(data["alpha"]))
    if kind == "constant_forcing":
        if "mu" not in data:
            raise ConfigError("problem: constant_forcing needs 'mu'")
        return ConstantForcing(mu=float(data["mu"]))
    raise ConfigError(f"problem: unknown kind {kind!r}")
