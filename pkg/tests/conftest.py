import numpy as np
import pytest

from mcflow import meshing, problems, radial, solver
from mcflow.geometry import Ellipse, FourierCurve


def make_domain(name):
    if name == "disk":
        return Ellipse(1.0, 1.0)
    if name == "ellipse":
        return Ellipse(2.0, 1.0)
    if name == "fourier":
        return FourierCurve(1.0, [(2, 0.1, 0.0)])
    raise KeyError(name)


def make_problem(tag):
    kind, value = tag.split("=")
    if kind == "a":
        return problems.PowerMC(float(value))
    return problems.ConstantForcing(float(value))


# the twelve standard fixtures: three domains x four problems
DOMAIN_NAMES = ("disk", "ellipse", "fourier")
PROBLEM_TAGS = ("a=2", "a=3", "mu=0.5", "mu=1")


class SolveCache:
    """Session-wide cache of meshes, solves and radial profiles."""

    def __init__(self):
        self._domains = {}
        self._meshes = {}
        self._solves = {}
        self._oracles = {}

    def domain(self, name):
        if name not in self._domains:
            self._domains[name] = make_domain(name)
        return self._domains[name]

    def mesh(self, name, h):
        key = (name, h)
        if key not in self._meshes:
            self._meshes[key] = meshing.triangulate(self.domain(name), h)
        return self._meshes[key]

    def solve(self, name, tag, h):
        """(mesh, field, gradients) for a fixture, solved once."""
        key = (name, tag, h)
        if key not in self._solves:
            mesh = self.mesh(name, h)
            fld = solver.newton_solve(mesh, make_problem(tag))
            grads = solver.recover_gradient(mesh, fld)
            self._solves[key] = (mesh, fld, grads)
        return self._solves[key]

    def oracle(self, tag, R=1.0, n=10_000):
        key = (tag, R, n)
        if key not in self._oracles:
            self._oracles[key] = radial.solve_radial(make_problem(tag), R, n)
        return self._oracles[key]


@pytest.fixture(scope="session")
def cache():
    return SolveCache()


@pytest.fixture(scope="session")
def disk_mesh_fine(cache):
    return cache.mesh("disk", 0.05)


def vertex_radii(mesh):
    return np.linalg.norm(mesh.vertices, axis=1)
