"""Damped-Newton P1 Galerkin solver for the two Dirichlet problems.

The weak form with the divergence term moved by parts reads, per interior
test function phi_i,

    R_i = sum_T area_T (grad u . grad phi_i) / w_T
        + sum_T area_T g(w_T) / 3                   (vertex-lumped forcing)

with w_T = sqrt(1 + |grad u|^2) constant on each triangle, so a Newton
step needs nothing beyond the exact per-triangle linearization assembled
by the kernels. Homogeneous Dirichlet values are eliminated: fields
carry zeros at boundary vertices and only interior unknowns enter the
linear solves.
"""

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from . import _kernels, problems
from .errors import InterpolationOutsideDomain, NonConvergence


@dataclass
class SolveOptions:
    residual_tol: float = 1e-10
    max_iters: int = 50
    max_halvings: int = 20
    continuation_steps: int = 1

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")


class ScalarField:
    """Nodal values with homogeneous Dirichlet data pinned to exact zero."""

    def __init__(self, mesh, values=None):
        self.mesh = mesh
        if values is None:
            values = np.zeros(mesh.n_vertices)
        values = np.ascontiguousarray(values, dtype=np.float64).copy()
        if values.shape != (mesh.n_vertices,):
            raise ValueError("one value per vertex required")
        values[mesh.boundary_vertex_ids] = 0.0
        self.values = values
        self.solve_trace = None

    def copy(self):
        out = ScalarField(self.mesh, self.values)
        out.solve_trace = self.solve_trace
        return out


class GradientField:
    """Per-triangle P1 gradients plus area-weighted vertex recovery.

    Boundary vertices additionally carry ``normal_slope`` and
    ``normal_second``, the first and second outward normal derivatives
    from a fit along the inward normal; on the zero level set of the
    solution the slope equals |grad u|.
    """

    def __init__(self, mesh, tri_grads, vertex_grads, normal_slope,
                 normal_second=None):
        self.mesh = mesh
        self.tri_grads = tri_grads
        self.vertex_grads = vertex_grads
        self.normal_slope = normal_slope  # aligned with boundary_vertex_ids
        self.normal_second = normal_second

    def slope_factor(self, where="triangle"):
        """w = sqrt(1 + |grad u|^2) per triangle or per vertex."""
        g = self.tri_grads if where == "triangle" else self.vertex_grads
        return np.sqrt(1.0 + np.sum(g * g, axis=1))

    def vertex_magnitudes(self):
        """|grad u| per vertex; boundary vertices use the fitted normal
        slope since the tangential derivative vanishes there."""
        out = np.linalg.norm(self.vertex_grads, axis=1)
        out[self.mesh.boundary_vertex_ids] = self.normal_slope
        return out


def residual(mesh, fld, problem):
    """Galerkin residual restricted to interior vertices."""
    kind, param = problems.kernel_tag(problem)
    full = _kernels.residual_full(
        mesh.triangles, mesh.grad_hat, mesh.tri_areas, fld.values,
        kind, param)
    return full[mesh.interior_ids]


def jacobian(mesh, fld, problem):
    """Exact derivative of ``residual`` w.r.t. interior nodal values."""
    kind, param = problems.kernel_tag(problem)
    blocks = _kernels.jacobian_blocks(
        mesh.triangles, mesh.grad_hat, mesh.tri_areas, fld.values,
        kind, param)
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_vertices
    full = sp.coo_matrix((blocks.ravel(), (rows, cols)),
                         shape=(n, n)).tocsr()
    return full[mesh.interior_ids][:, mesh.interior_ids]


def newton_solve(mesh, problem, opts=None):
    """Solve the Dirichlet problem; returns the converged ScalarField.

    Starts from the flat state, optionally ramping the problem parameter
    over ``continuation_steps`` warm-started stages. Each Newton step
    backtracks by halving until the max-norm residual decreases. Raises
    NonConvergence with the iteration trace otherwise; the converged
    field is checked to be negative at every interior vertex.
    """
    opts = opts or SolveOptions()
    fld = ScalarField(mesh)
    trace = []
    steps = max(1, opts.continuation_steps)
    for stage in range(1, steps + 1):
        stage_problem = problem if stage == steps else problems.scaled(
            problem, stage / steps)
        fld = _newton_stage(mesh, stage_problem, fld, opts, trace, stage)
    fld.solve_trace = trace

    interior = fld.values[mesh.interior_ids]
    if interior.size and interior.max() >= 0.0:
        raise NonConvergence(
            len(trace), float(np.abs(residual(mesh, fld, problem)).max()),
            trace)
    return fld


def _newton_stage(mesh, problem, fld, opts, trace, stage):
    res = residual(mesh, fld, problem)
    res_norm = float(np.abs(res).max())
    for it in range(1, opts.max_iters + 1):
        if res_norm <= opts.residual_tol:
            return fld
        jac = jacobian(mesh, fld, problem)
        delta = spsolve(jac.tocsc(), -res)

        lam = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = fld.values.copy()
            trial[mesh.interior_ids] += lam * delta
            trial_field = ScalarField(mesh, trial)
            trial_res = residual(mesh, trial_field, problem)
            trial_norm = float(np.abs(trial_res).max())
            if trial_norm < res_norm:
                break
            lam *= 0.5
        else:
            trace.append({"stage": stage, "iter": it, "residual": res_norm,
                          "damping": 0.0})
            raise NonConvergence(it, res_norm, trace)

        fld, res, res_norm = trial_field, trial_res, trial_norm
        trace.append({"stage": stage, "iter": it, "residual": res_norm,
                      "damping": lam})
    if res_norm <= opts.residual_tol:
        return fld
    raise NonConvergence(opts.max_iters, res_norm, trace)


def recover_gradient(mesh, fld):
    """Per-triangle gradients, area-weighted vertex averages and fitted
    boundary normal derivatives.

    The boundary fit samples the recovered gradient along the inward
    normal at depths {3h..10h} (outside the noisy boundary band, where
    vertex recovery on the interior lattice is nearly second order) and
    extrapolates the slope angle atan(du/dn) to the wall with a
    least-squares parabola. Fitting the angle rather than the raw slope
    keeps the extrapolation stable for steep profiles, whose higher
    radial derivatives are compressed by 1/(1 + slope^2). Both normal
    derivatives come from the same fit.
    """
    tri_grads = np.einsum("fk,fkd->fd", fld.values[mesh.triangles],
                          mesh.grad_hat)
    num = np.zeros((mesh.n_vertices, 2))
    den = np.zeros(mesh.n_vertices)
    np.add.at(num, mesh.triangles.ravel(),
              np.repeat(tri_grads * mesh.tri_areas[:, None], 3, axis=0))
    np.add.at(den, mesh.triangles.ravel(),
              np.repeat(mesh.tri_areas, 3))
    vertex_grads = num / den[:, None]

    # area-weighted averaging is nearly second order on the symmetric
    # interior lattice patches but badly one-sided along the boundary
    # band; there a least-squares quadratic through the (superconvergent)
    # nodal values does much better
    band = set(int(v) for v in mesh.boundary_vertex_ids)
    nbrs = mesh.neighbor_sets()
    for v in list(band):
        band |= nbrs[v]
    band = np.fromiter(sorted(band), dtype=int)
    vertex_grads[band] = _patch_gradients(mesh, fld.values, band)

    normal_slope, normal_second = _normal_profile_fit(mesh, vertex_grads)
    return GradientField(mesh, tri_grads, vertex_grads, normal_slope,
                         normal_second)


def _patch_gradients(mesh, values, targets):
    """Gradient at each target vertex of the least-squares quadratic
    through the nodal values on its two-ring patch, batched over
    vertices with zero-weight padding."""
    nbrs = mesh.neighbor_sets()
    patches = []
    for v in targets:
        patch = {int(v)} | nbrs[v]
        for w in list(patch):
            patch |= nbrs[w]
        patches.append(np.fromiter(patch, dtype=int))
    width = max(len(p) for p in patches)
    ids = np.stack([np.pad(p, (0, width - len(p)), constant_values=p[0])
                    for p in patches])
    w = np.stack([np.pad(np.ones(len(p)), (0, width - len(p)))
                  for p in patches])

    d = (mesh.vertices[ids] - mesh.vertices[targets][:, None, :]) / mesh.h
    basis = np.stack([np.ones_like(d[..., 0]), d[..., 0], d[..., 1],
                      d[..., 0] ** 2, d[..., 0] * d[..., 1],
                      d[..., 1] ** 2], axis=-1)      # (n, width, 6)
    wb = basis * w[..., None]
    gram = np.einsum("npa,npb->nab", wb, basis)
    rhs = np.einsum("npa,np->na", wb, values[ids])
    coef = np.linalg.solve(gram, rhs[..., None])[..., 0]
    return coef[:, 1:3] / mesh.h


_FIT_DEPTHS = np.arange(3, 11)  # in units of h


def _normal_profile_fit(mesh, vertex_grads):
    """Least-squares parabola through atan(du/dn) sampled along the
    inward normal; returns outward (u_n, u_nn) per boundary vertex.
    Depths are halved (up to three times) if a sample exits the mesh."""
    bpos = mesh.vertices[mesh.boundary_vertex_ids]
    normals = _outward_normals(mesh)
    for scale in (1.0, 0.5, 0.25, 0.125):
        rho = _FIT_DEPTHS * mesh.h * scale
        angles = np.zeros((len(rho), len(bpos)))
        ok = True
        for i, r in enumerate(rho):
            pts = bpos - r * normals
            simplex, w, v = mesh.barycentric(pts)
            if np.any(simplex < 0):
                ok = False
                break
            gx = np.einsum("nk,nk->n", w, vertex_grads[v, 0])
            gy = np.einsum("nk,nk->n", w, vertex_grads[v, 1])
            angles[i] = np.arctan(gx * normals[:, 0] + gy * normals[:, 1])
        if not ok:
            continue
        basis = rho[:, None] ** np.arange(3)[None, :]
        coef, *_ = np.linalg.lstsq(basis, angles, rcond=None)
        # extrapolation must stay a slope angle: cap short of +-pi/2 so a
        # near-vertical profile reports a huge finite slope, never a
        # wrapped tangent
        angle0 = np.clip(coef[0], -1.55, 1.55)
        u_n = np.tan(angle0)
        u_nn = -coef[1] * (1.0 + u_n ** 2)
        return u_n, u_nn
    raise InterpolationOutsideDomain(
        "normal-line sample points left the mesh")


def _outward_normals(mesh):
    v = mesh.domain.velocity(mesh.boundary_t)
    speed = np.linalg.norm(v, axis=1)
    return np.stack([v[:, 1], -v[:, 0]], axis=1) / speed[:, None]


def mirror_defect(mesh, fld, axis):
    """Max |u(x,y) - u(mirror(x,y))| with the mirrored value obtained by
    interpolation; ~rounding level when the mesh is mirror-symmetric.
    axis = 0 mirrors x, axis = 1 mirrors y."""
    mirrored = mesh.vertices.copy()
    mirrored[:, axis] = -mirrored[:, axis]
    got = mesh.interpolate(fld.values, mirrored)
    return float(np.abs(got - fld.values).max())


def solution_to_csv(mesh, fld, grads, path):
    """Write `id,x,y,u,ux,uy` per vertex."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "u", "ux", "uy"])
        for i in range(mesh.n_vertices):
            writer.writerow(
                [i, repr(float(mesh.vertices[i, 0])),
                 repr(float(mesh.vertices[i, 1])),
                 repr(float(fld.values[i])),
                 repr(float(grads.vertex_grads[i, 0])),
                 repr(float(grads.vertex_grads[i, 1]))])
