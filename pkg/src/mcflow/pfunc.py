"""Auxiliary P-function fields and their extrema.

Two functional combinations of a solution and its gradient obey
boundary minimum principles for beta in [1, 2]:

    phi(x; beta) = 2/(alpha-1) (1 + |grad u|^2)^((alpha-1)/2) - beta u
    psi(x; beta) = ln( (1+|grad v|^2) / (1 + mu sqrt(1+|grad v|^2))^2 ) - beta v

phi is undefined for alpha = 1; callers wanting the soliton case may
evaluate psi with mu = 0 directly, but the package never substitutes
one for the other.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import problems
from .errors import AlphaOne

BOUNDARY_MIN_TOL_REL = 1e-3
THEOREM_BETA_RANGE = (1.0, 2.0)


@dataclass
class PFunctionField:
    kind: str                 # "phi" | "psi"
    beta: float
    values: np.ndarray
    argmin_vertex: int
    argmax_vertex: int
    min_on_boundary: bool


def phi(alpha, beta, u_value, grad):
    """Gradient-power P-function; alpha must differ from 1."""
    if abs(alpha - 1.0) < 1e-12:
        raise AlphaOne("phi is singular at alpha = 1")
    g2 = _grad_sq(grad)
    return (2.0 / (alpha - 1.0)) * (1.0 + g2) ** ((alpha - 1.0) / 2.0) \
        - beta * np.asarray(u_value)


def psi(mu, beta, v_value, grad):
    """Logarithmic P-function for the forced problem; mu >= 0."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    g2 = _grad_sq(grad)
    w = np.sqrt(1.0 + g2)
    return np.log((1.0 + g2) / (1.0 + mu * w) ** 2) - beta * np.asarray(v_value)


def _grad_sq(grad):
    g = np.asarray(grad, dtype=float)
    return np.sum(g * g, axis=-1)


def evaluate_field(mesh, fld, grads, problem, beta):
    """Vertexwise P-function with extremum bookkeeping.

    Interior vertices use the recovered vertex gradient; boundary
    vertices use the fitted normal slope as |grad u| (the tangential
    derivative vanishes on the zero level set). The discrete minimum
    counts as boundary-attained if the argmin is a boundary vertex or
    the interior minimum exceeds the boundary minimum less a relative
    tolerance on the field range.
    """
    g2 = np.sum(grads.vertex_grads ** 2, axis=1)
    g2[mesh.boundary_vertex_ids] = grads.normal_slope ** 2
    grad_vectors = np.stack([np.sqrt(g2), np.zeros_like(g2)], axis=1)

    if isinstance(problem, problems.PowerMC):
        kind = "phi"
        values = phi(problem.alpha, beta, fld.values, grad_vectors)
    else:
        kind = "psi"
        values = psi(problem.mu, beta, fld.values, grad_vectors)

    argmin = int(np.argmin(values))
    argmax = int(np.argmax(values))
    boundary_min = float(values[mesh.boundary_vertex_ids].min())
    interior_min = float(values[mesh.interior_ids].min()) \
        if len(mesh.interior_ids) else np.inf
    span = float(values.max() - values.min())
    min_on_boundary = bool(
        mesh.is_boundary[argmin]
        or interior_min >= boundary_min - BOUNDARY_MIN_TOL_REL * span)
    return PFunctionField(kind=kind, beta=float(beta), values=values,
                          argmin_vertex=argmin, argmax_vertex=argmax,
                          min_on_boundary=min_on_boundary)


def beta_in_theorem_range(beta):
    lo, hi = THEOREM_BETA_RANGE
    return lo <= beta <= hi


def field_to_csv(mesh, pfield, path):
    """Write `id,x,y,P` rows for one (kind, beta) field."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "P"])
        for i in range(mesh.n_vertices):
            writer.writerow([i, repr(float(mesh.vertices[i, 0])),
                             repr(float(mesh.vertices[i, 1])),
                             repr(float(pfield.values[i]))])
