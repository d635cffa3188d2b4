import numpy as np
import pytest

from mcflow import meshing, solver
from mcflow.errors import NonConvergence
from mcflow.problems import ConstantForcing, PowerMC
from mcflow.solver import ScalarField, SolveOptions, jacobian, residual

from conftest import vertex_radii


def lumped_mass(mesh):
    out = np.zeros(mesh.n_vertices)
    np.add.at(out, mesh.triangles.ravel(), np.repeat(mesh.tri_areas / 3.0, 3))
    return out


def random_interior_field(mesh, seed=0, amplitude=0.3):
    rng = np.random.default_rng(seed)
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    values = amplitude * (np.sin(1.3 * x + 0.4) * np.cos(0.9 * y)
                          + 0.3 * rng.standard_normal(mesh.n_vertices))
    return ScalarField(mesh, values)


# --- residual ---------------------------------------------------------------

def test_zero_field_residual_is_lumped_mass(cache):
    mesh = cache.mesh("disk", 0.1)
    fld = ScalarField(mesh)
    for alpha in (0.5, 1.0, 3.0):
        r = residual(mesh, fld, PowerMC(alpha))
        assert np.allclose(r, lumped_mass(mesh)[mesh.interior_ids],
                           atol=1e-14)


def test_zero_field_residual_constant_forcing(cache):
    mesh = cache.mesh("disk", 0.1)
    r = residual(mesh, ScalarField(mesh), ConstantForcing(1.0))
    assert np.allclose(r, 2.0 * lumped_mass(mesh)[mesh.interior_ids],
                       atol=1e-14)


def test_converged_residual_small(cache):
    mesh, fld, _ = cache.solve("disk", "a=1", 0.05)
    r = residual(mesh, fld, PowerMC(1.0))
    assert np.abs(r).max() <= 1e-10


# --- jacobian ---------------------------------------------------------------

@pytest.fixture(scope="module")
def small_mesh():
    from mcflow.geometry import Ellipse
    # ~200 vertices
    return meshing.triangulate(Ellipse(1.0, 1.0), 0.16)


@pytest.mark.parametrize("problem", [PowerMC(2.0), ConstantForcing(1.0),
                                     PowerMC(1.0)])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_jacobian_matches_central_differences(small_mesh, problem, seed):
    mesh = small_mesh
    fld = random_interior_field(mesh, seed)
    jac = jacobian(mesh, fld, problem).toarray()
    eps = 1e-6
    worst = 0.0
    for col, vid in enumerate(mesh.interior_ids):
        up = fld.values.copy()
        up[vid] += eps
        dn = fld.values.copy()
        dn[vid] -= eps
        fd = (residual(mesh, ScalarField(mesh, up), problem)
              - residual(mesh, ScalarField(mesh, dn), problem)) / (2 * eps)
        worst = max(worst, np.abs(fd - jac[:, col]).max())
    assert worst <= 1e-6


def test_jacobian_at_zero_is_laplace_stiffness(cache):
    # at the flat state W=1 kills the rank-one and forcing-derivative
    # terms of the power problem with alpha -> the pure stiffness matrix
    mesh = cache.mesh("disk", 0.1)
    fld = ScalarField(mesh)
    jac = jacobian(mesh, fld, PowerMC(1.0)).toarray()
    # assemble the P1 Laplace stiffness directly
    import scipy.sparse as sp
    dots = np.einsum("fkd,fld->fkl", mesh.grad_hat, mesh.grad_hat)
    blocks = dots * mesh.tri_areas[:, None, None]
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_vertices
    stiff = sp.coo_matrix((blocks.ravel(), (rows, cols)),
                          shape=(n, n)).tocsr()
    stiff = stiff[mesh.interior_ids][:, mesh.interior_ids].toarray()
    assert np.abs(jac - stiff).max() <= 1e-12
    # stiffness part is symmetric at the flat state
    assert np.abs(jac - jac.T).max() <= 1e-12


# --- newton_solve -----------------------------------------------------------

def test_disk_solve_matches_radial_oracle(cache):
    mesh, fld, _ = cache.solve("disk", "a=1", 0.05)
    oracle = cache.oracle("a=1")
    err = np.abs(fld.values - oracle.interp_u(vertex_radii(mesh))).max()
    assert err <= 5e-3


def test_disk_solve_matches_radial_oracle_forcing(cache):
    mesh, fld, _ = cache.solve("disk", "mu=1", 0.05)
    oracle = cache.oracle("mu=1")
    err = np.abs(fld.values - oracle.interp_u(vertex_radii(mesh))).max()
    assert err <= 5e-3


def test_ellipse_alpha3_converges_quickly(cache):
    mesh, fld, _ = cache.solve("ellipse", "a=3", 0.05)
    assert len(fld.solve_trace) <= 25
    assert fld.solve_trace[-1]["residual"] <= 1e-10


def test_interior_negativity(cache):
    for name in ("disk", "ellipse", "fourier"):
        for tag in ("a=2", "mu=0.5"):
            mesh, fld, _ = cache.solve(name, tag, 0.05)
            assert fld.values[mesh.interior_ids].max() < 0


@pytest.mark.parametrize("axis", [0, 1])
def test_mirror_symmetry_on_ellipse(cache, axis):
    mesh, fld, _ = cache.solve("ellipse", "a=2", 0.05)
    assert solver.mirror_defect(mesh, fld, axis) <= 1e-8


def test_newton_quadratic_convergence(cache):
    _, fld, _ = cache.solve("disk", "a=1", 0.1)
    res = [step["residual"] for step in fld.solve_trace
           if step["residual"] > 1e-14]
    # order estimate from the last three usable iterates
    assert len(res) >= 3
    r0, r1, r2 = res[-3], res[-2], res[-1]
    order = np.log(r2 / r1) / np.log(r1 / r0)
    assert order >= 1.5


def test_mesh_convergence_order(cache):
    oracle = cache.oracle("a=1")
    errs = []
    hs = [0.2, 0.1, 0.05]
    for h in hs:
        mesh, fld, _ = cache.solve("disk", "a=1", h)
        errs.append(np.abs(fld.values - oracle.interp_u(
            vertex_radii(mesh))).max())
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert order >= 1.5


def test_nonconvergence_carries_trace(cache):
    mesh = cache.mesh("disk", 0.1)
    with pytest.raises(NonConvergence) as err:
        solver.newton_solve(mesh, ConstantForcing(1.0),
                            SolveOptions(max_iters=2))
    assert err.value.iterations >= 1
    assert err.value.trace
    assert err.value.final_residual > 0


def test_continuation_reaches_same_solution(cache):
    mesh = cache.mesh("disk", 0.1)
    direct = solver.newton_solve(mesh, ConstantForcing(1.0))
    ramped = solver.newton_solve(mesh, ConstantForcing(1.0),
                                 SolveOptions(continuation_steps=3))
    assert np.abs(direct.values - ramped.values).max() <= 1e-9


# --- gradient recovery ------------------------------------------------------

def test_triangle_gradients_exact_on_linears(cache):
    mesh = cache.mesh("disk", 0.1)
    values = mesh.vertices[:, 0]
    tri_grads = np.einsum("fk,fkd->fd", values[mesh.triangles],
                          mesh.grad_hat)
    assert np.abs(tri_grads[:, 0] - 1.0).max() <= 1e-12
    assert np.abs(tri_grads[:, 1]).max() <= 1e-12


def test_vertex_recovery_on_quadratic(cache):
    from types import SimpleNamespace
    mesh = cache.mesh("disk", 0.05)
    # x^2 is not zero on the boundary, so bypass the Dirichlet field type
    fld = SimpleNamespace(values=mesh.vertices[:, 0] ** 2)
    grads = solver.recover_gradient(mesh, fld)
    want = np.stack([2.0 * mesh.vertices[:, 0],
                     np.zeros(mesh.n_vertices)], axis=1)
    err = np.linalg.norm(grads.vertex_grads - want, axis=1).max()
    assert err <= 0.15


def test_boundary_normal_slope_positive_on_solutions(cache):
    for tag in ("a=1", "a=3", "mu=1"):
        _, _, grads = cache.solve("disk", tag, 0.05)
        assert np.all(grads.normal_slope > 0)


def test_boundary_q_matches_oracle(cache):
    _, _, grads = cache.solve("disk", "a=1", 0.05)
    oracle = cache.oracle("a=1")
    rel = np.abs(grads.normal_slope - oracle.q).max() / oracle.q
    assert rel <= 0.02


def test_slope_factor_accessor(cache):
    mesh, _, grads = cache.solve("disk", "a=1", 0.05)
    w_tri = grads.slope_factor("triangle")
    w_vert = grads.slope_factor("vertex")
    assert w_tri.shape == (mesh.n_triangles,)
    assert w_vert.shape == (mesh.n_vertices,)
    assert np.all(w_tri >= 1.0) and np.all(w_vert >= 1.0)


def test_solution_csv(tmp_path, cache):
    mesh, fld, grads = cache.solve("disk", "a=1", 0.1)
    path = tmp_path / "solution.csv"
    solver.solution_to_csv(mesh, fld, grads, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "id,x,y,u,ux,uy"
    assert len(lines) == mesh.n_vertices + 1


def test_field_boundary_pinned(cache):
    mesh = cache.mesh("disk", 0.1)
    rng = np.random.default_rng(5)
    fld = ScalarField(mesh, rng.standard_normal(mesh.n_vertices))
    assert np.all(fld.values[mesh.boundary_vertex_ids] == 0.0)


def test_options_validate():
    with pytest.raises(ValueError):
        SolveOptions(residual_tol=0.0)
