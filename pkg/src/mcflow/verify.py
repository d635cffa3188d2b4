"""Theorem-level checks on converged solutions.

Covers the critical-point census, the directional-derivative boundary
zero count, the normal-coordinate boundary identity used as a solver
diagnostic, and the closed-form lower/upper bounds on the boundary
slope and the solution depth. ``full_report`` orchestrates a complete
run and aggregates everything into one serializable report.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, meshing, pfunc, problems, solver
from .errors import NoCriticalPoint

BOUND_NAMES = ("Eq1_9", "Eq1_10", "Eq1_11", "Eq1_12", "Thm6_1", "Eq6_11")
THETA_SWEEP = tuple(k * math.pi / 8.0 for k in range(8))


# ---------------------------------------------------------------------------
# closed-form bound checks
# ---------------------------------------------------------------------------

@dataclass
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    slack: float
    holds: bool
    applicable: bool

    def to_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "slack": self.slack, "holds": self.holds,
                "applicable": self.applicable}


def _make_check(name, lhs, rhs, applicable, lower=True):
    if not applicable:
        return BoundCheck(name=name, lhs=float(lhs), rhs=None, slack=None,
                          holds=False, applicable=False)
    slack = (lhs - rhs) if lower else (rhs - lhs)
    tol_abs = 1e-3 * max(1.0, abs(rhs))
    return BoundCheck(name=name, lhs=float(lhs), rhs=float(rhs),
                      slack=float(slack), holds=bool(slack >= -tol_abs),
                      applicable=True)


def check_bounds(q_min, u_min, kappa_max, d, problem):
    """All six closed-form checks, inapplicable ones flagged.

    Lower bounds (slack = lhs - rhs):
      Eq1_9   q_min  >= sqrt(max(kappa_max^(-2/(alpha+1)) - 1, 0))
      Eq1_10  -u_min >= 2/(alpha-1) (kappa_max^(-(alpha-1)/(alpha+1)) - 1)
      Eq1_11  q_min  >= (1+mu)/(2 kappa_max)
      Eq1_12  -v_min >= 2 ln((1+mu) S / (1 + mu S)),
              S = sqrt(1 + (1+mu)^2/(4 kappa_max^2))
    Upper bounds (slack = rhs - lhs), needing inradius d < pi/2:
      Thm6_1  -u_min <= 1/(alpha-1) ((1/cos d)^(alpha-1) - 1)  [alpha > 1]
      Eq6_11  -v_min <= ln(1/cos d)

    The Eq1_9 right-hand side is the positive root of
    1 + q^2 >= kappa_max^(-2/(alpha+1)); it degenerates to 0 (a vacuous
    check) whenever kappa_max >= 1. Note that the Eq6_11 depth cap is
    independent of mu and genuinely fails for strong forcing on large
    domains; the check then reports negative slack.
    """
    is_power = isinstance(problem, problems.PowerMC)
    depth = -u_min
    out = []

    if is_power:
        alpha = problem.alpha
        ok = abs(alpha - 1.0) >= 1e-12
        power_rhs = kappa_max ** (-2.0 / (alpha + 1.0)) if ok else None
        rhs19 = math.sqrt(max(power_rhs - 1.0, 0.0)) if ok else None
        rhs110 = (2.0 / (alpha - 1.0)) * (
            kappa_max ** (-(alpha - 1.0) / (alpha + 1.0)) - 1.0) if ok \
            else None
        out.append(_make_check("Eq1_9", q_min, rhs19, ok))
        out.append(_make_check("Eq1_10", depth, rhs110, ok))
        out.append(_make_check("Eq1_11", q_min, None, False))
        out.append(_make_check("Eq1_12", depth, None, False))
        ok61 = alpha > 1.0 + 1e-12 and d < math.pi / 2.0
        rhs61 = (1.0 / (alpha - 1.0)) * (
            (1.0 / math.cos(d)) ** (alpha - 1.0) - 1.0) if ok61 else None
        out.append(_make_check("Thm6_1", depth, rhs61, ok61, lower=False))
        out.append(_make_check("Eq6_11", depth, None, False, lower=False))
    else:
        mu = problem.mu
        s_factor = math.sqrt(1.0 + (1.0 + mu) ** 2 / (4.0 * kappa_max ** 2))
        rhs112 = 2.0 * math.log(
            (1.0 + mu) * s_factor / (1.0 + mu * s_factor))
        out.append(_make_check("Eq1_9", q_min, None, False))
        out.append(_make_check("Eq1_10", depth, None, False))
        out.append(_make_check("Eq1_11", q_min,
                               (1.0 + mu) / (2.0 * kappa_max), True))
        out.append(_make_check("Eq1_12", depth, rhs112, True))
        out.append(_make_check("Thm6_1", depth, None, False, lower=False))
        ok611 = d < math.pi / 2.0
        rhs611 = math.log(1.0 / math.cos(d)) if ok611 else None
        out.append(_make_check("Eq6_11", depth, rhs611, ok611, lower=False))
    return out


# ---------------------------------------------------------------------------
# critical points and nodal-line zero counts
# ---------------------------------------------------------------------------

@dataclass
class CriticalPoint:
    position: tuple
    grad_norm: float
    hessian_diag: tuple

    def to_dict(self):
        return {"position": list(self.position),
                "grad_norm": self.grad_norm,
                "hessian_diag": list(self.hessian_diag)}


@dataclass
class CriticalPointReport:
    points: list
    count: int
    z_theta_zero_counts: dict = field(default_factory=dict)

    def to_dict(self):
        return {"count": self.count,
                "points": [p.to_dict() for p in self.points],
                "z_theta_zero_counts": [
                    [theta, count]
                    for theta, count in sorted(
                        self.z_theta_zero_counts.items())]}


def find_critical_points(mesh, grads, tol=None, fld=None):
    """Cluster interior vertices with small recovered gradient.

    Default threshold 5 h^2 max|grad u| keeps only vertices within
    O(h) of a genuine critical point. Adjacent passing vertices merge
    into one cluster reported at a centroid weighted by (tol - |grad|),
    which favors the flattest vertices without blowing up on exact
    zeros. When the nodal field is supplied, diagonal second
    derivatives are estimated from a local quadratic fit.
    """
    mags = grads.vertex_magnitudes()
    if tol is None:
        tol = 5.0 * mesh.h ** 2 * float(mags.max())
    passing = [int(v) for v in mesh.interior_ids if mags[v] < tol]
    if not passing:
        raise NoCriticalPoint(f"no interior vertex with |grad| < {tol:.3e}")

    clusters = _adjacency_clusters(mesh, passing)
    points = []
    for cluster in clusters:
        ids = np.array(cluster)
        weights = tol - mags[ids]
        centroid = (weights[:, None] * mesh.vertices[ids]).sum(axis=0) \
            / weights.sum()
        hess = _hessian_diag(mesh, fld, centroid) if fld is not None \
            else (None, None)
        points.append(CriticalPoint(
            position=(float(centroid[0]), float(centroid[1])),
            grad_norm=float(mags[ids].min()),
            hessian_diag=hess))
    return CriticalPointReport(points=points, count=len(points))


def _adjacency_clusters(mesh, vertex_ids):
    remaining = set(vertex_ids)
    nbrs = mesh.neighbor_sets()
    clusters = []
    while remaining:
        seed = remaining.pop()
        stack, cluster = [seed], [seed]
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if w in remaining:
                    remaining.remove(w)
                    stack.append(w)
                    cluster.append(w)
        clusters.append(sorted(cluster))
    return clusters


def _hessian_diag(mesh, fld, center, radius_factor=2.5):
    dist = np.linalg.norm(mesh.vertices - center, axis=1)
    ids = np.flatnonzero(dist <= radius_factor * mesh.h)
    if len(ids) < 8:
        ids = np.argsort(dist)[:8]
    x = mesh.vertices[ids, 0] - center[0]
    y = mesh.vertices[ids, 1] - center[1]
    basis = np.stack([np.ones_like(x), x, y, x * x, x * y, y * y], axis=1)
    coef, *_ = np.linalg.lstsq(basis, fld.values[ids], rcond=None)
    return (float(2.0 * coef[3]), float(2.0 * coef[5]))


def z_theta_boundary_zeros(mesh, grads, theta):
    """Sign changes of grad u . (cos theta, sin theta) around the
    boundary loop; exact zeros are merged with a neighbor."""
    g = grads.vertex_grads[mesh.boundary_vertex_ids]
    z = g[:, 0] * math.cos(theta) + g[:, 1] * math.sin(theta)
    signs = np.sign(z)
    signs = signs[signs != 0]
    if len(signs) < 2:
        return 0
    return int(np.sum(signs != np.roll(signs, -1)))


# ---------------------------------------------------------------------------
# boundary identity diagnostic
# ---------------------------------------------------------------------------

def identity_gap(problem, u_n, u_nn, kappa):
    """Pointwise residual of the normal-coordinate form of the equation.

    PowerMC:          u_nn + kappa u_n (1+u_n^2) - (1+u_n^2)^((3-alpha)/2)
    ConstantForcing:  v_nn - (1+v_n^2)(1 - kappa v_n) - mu (1+v_n^2)^(3/2)
    """
    u_n = np.asarray(u_n, dtype=float)
    u_nn = np.asarray(u_nn, dtype=float)
    w2 = 1.0 + u_n ** 2
    if isinstance(problem, problems.PowerMC):
        return u_nn + kappa * u_n * w2 - w2 ** (0.5 * (3.0 - problem.alpha))
    return u_nn - w2 * (1.0 - kappa * u_n) - problem.mu * w2 ** 1.5


def boundary_identity_residual(mesh, fld, grads, problem, spec=None):
    """Max | identity gap | over boundary vertices.

    u_n and u_nn come from the normal-profile fit carried by the
    gradient field (a least-squares parabola through the slope angle
    sampled outside the noisy near-boundary band). The residual is a
    solver diagnostic: around or below 0.5 at h = 0.05 on the disk
    fixtures and shrinking with the mesh.
    """
    spec = spec or mesh.domain
    u_n = grads.normal_slope
    u_nn = grads.normal_second
    if u_nn is None:
        u_n, u_nn = solver._normal_profile_fit(mesh, grads.vertex_grads)
    kappa = geometry.curvature(spec, mesh.boundary_t)
    gap = identity_gap(problem, u_n, u_nn, kappa)
    return float(np.abs(gap).max())


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

@dataclass
class PFuncSummary:
    kind: str
    beta: float
    min_on_boundary: bool
    argmin_vertex: int
    argmax_vertex: int
    within_theorem_range: bool
    skipped: bool = False
    note: str = ""

    def to_dict(self):
        return {"kind": self.kind, "beta": self.beta,
                "min_on_boundary": self.min_on_boundary,
                "argmin_vertex": self.argmin_vertex,
                "argmax_vertex": self.argmax_vertex,
                "within_theorem_range": self.within_theorem_range,
                "skipped": self.skipped, "note": self.note}


@dataclass
class VerificationReport:
    domain: dict
    problem: dict
    h: float
    betas: list
    q_min: float
    u_min: float
    kappa_max: float
    inradius: float
    critical: CriticalPointReport
    pfunc_results: list
    bounds: list
    boundary_identity_residual: float
    newton_iterations: int
    final_residual: float
    checks_pass: bool

    def to_dict(self):
        return {
            "domain": self.domain,
            "problem": self.problem,
            "h": self.h,
            "betas": list(self.betas),
            "q_min": self.q_min,
            "u_min": self.u_min,
            "kappa_max": self.kappa_max,
            "inradius": self.inradius,
            "critical": self.critical.to_dict(),
            "pfunc": [p.to_dict() for p in self.pfunc_results],
            "bounds": [b.to_dict() for b in self.bounds],
            "boundary_identity_residual": self.boundary_identity_residual,
            "newton_iterations": self.newton_iterations,
            "final_residual": self.final_residual,
            "checks_pass": self.checks_pass,
        }

    def to_json(self):
        # floats serialize through repr: shortest exact form, <= 17
        # significant digits, parses back to the identical value
        return json.dumps(self.to_dict(), indent=2) + "\n"


def report_from_json(text):
    data = json.loads(text)
    critical = CriticalPointReport(
        points=[CriticalPoint(position=tuple(p["position"]),
                              grad_norm=p["grad_norm"],
                              hessian_diag=tuple(p["hessian_diag"]))
                for p in data["critical"]["points"]],
        count=data["critical"]["count"],
        z_theta_zero_counts={
            theta: count
            for theta, count in data["critical"]["z_theta_zero_counts"]})
    return VerificationReport(
        domain=data["domain"], problem=data["problem"], h=data["h"],
        betas=data["betas"], q_min=data["q_min"], u_min=data["u_min"],
        kappa_max=data["kappa_max"], inradius=data["inradius"],
        critical=critical,
        pfunc_results=[PFuncSummary(**p) for p in data["pfunc"]],
        bounds=[BoundCheck(**b) for b in data["bounds"]],
        boundary_identity_residual=data["boundary_identity_residual"],
        newton_iterations=data["newton_iterations"],
        final_residual=data["final_residual"],
        checks_pass=data["checks_pass"])


def full_report(spec, problem, h, beta_list, opts=None,
                assert_beta_range=True):
    """Solve, verify and aggregate: mesh, Newton solve, gradient
    recovery, P-function sweep, critical census, directional-derivative
    zero counts, boundary identity and closed-form bounds."""
    mesh = meshing.triangulate(spec, h)
    fld = solver.newton_solve(mesh, problem, opts)
    grads = solver.recover_gradient(mesh, fld)

    is_alpha_one = isinstance(problem, problems.PowerMC) \
        and problem.is_soliton
    pfunc_results = []
    for beta in beta_list:
        in_range = pfunc.beta_in_theorem_range(beta)
        if is_alpha_one:
            pfunc_results.append(PFuncSummary(
                kind="phi", beta=float(beta), min_on_boundary=False,
                argmin_vertex=-1, argmax_vertex=-1,
                within_theorem_range=in_range, skipped=True,
                note="alpha = 1: phi undefined (AlphaOne)"))
            continue
        pf = pfunc.evaluate_field(mesh, fld, grads, problem, beta)
        note = "" if in_range else \
            "beta outside [1, 2]: boundary minimum not asserted"
        pfunc_results.append(PFuncSummary(
            kind=pf.kind, beta=pf.beta,
            min_on_boundary=pf.min_on_boundary,
            argmin_vertex=pf.argmin_vertex,
            argmax_vertex=pf.argmax_vertex,
            within_theorem_range=in_range, note=note))

    critical = find_critical_points(mesh, grads, fld=fld)
    critical.z_theta_zero_counts = {
        theta: z_theta_boundary_zeros(mesh, grads, theta)
        for theta in THETA_SWEEP}

    identity = boundary_identity_residual(mesh, fld, grads, problem)

    q_min = float(grads.normal_slope.min())
    u_min = float(fld.values.min())
    kap = geometry.kappa_max(spec)
    d = geometry.inradius(spec)
    bounds = check_bounds(q_min, u_min, kap, d, problem)

    checks_pass = (
        all(b.holds for b in bounds if b.applicable)
        and critical.count == 1
        and all(c == 2 for c in critical.z_theta_zero_counts.values())
        and all(p.min_on_boundary for p in pfunc_results
                if p.within_theorem_range and not p.skipped))

    trace = fld.solve_trace or []
    return VerificationReport(
        domain=geometry.to_config(spec),
        problem=problems.to_dict(problem),
        h=float(h), betas=[float(b) for b in beta_list],
        q_min=q_min, u_min=u_min, kappa_max=float(kap), inradius=float(d),
        critical=critical, pfunc_results=pfunc_results, bounds=bounds,
        boundary_identity_residual=identity,
        newton_iterations=len(trace),
        final_residual=float(trace[-1]["residual"]) if trace else 0.0,
        checks_pass=checks_pass)
