"""Triangulation of convex domains for the P1 solver.

Boundary nodes are placed uniformly in arclength with spacing ~h and an
interior triangular lattice of pitch h is clipped half a spacing inside
the curve; Delaunay triangulation of the union then covers the domain.
Convexity makes constrained Delaunay unnecessary: the convex hull of
the node set is the boundary polygon itself.

When the domain has mirror symmetries the node set is generated so the
coordinates are bitwise symmetric; discrete solutions then inherit the
symmetry to rounding accuracy, which the verification module relies on.
"""

import csv

import numpy as np
from scipy.spatial import Delaunay

from . import geometry
from .errors import MeshQualityFailure, UnknownVertex

MIN_ANGLE_DEG = 20.0


class Mesh:
    """Immutable conforming triangulation with tagged boundary loop.

    vertices            (n, 2) coordinates; boundary first, ids 0..nb-1
    triangles           (m, 3) vertex ids, positively oriented
    boundary_vertex_ids counterclockwise along the boundary
    boundary_param      vertex id -> cumulative arclength
    h                   target edge length
    """

    def __init__(self, vertices, triangles, boundary_vertex_ids,
                 boundary_param, boundary_t, h, domain):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        vertices = self.vertices
        triangles = self.triangles
        self.boundary_vertex_ids = boundary_vertex_ids
        self.boundary_param = boundary_param
        self.boundary_t = boundary_t
        self.h = h
        self.domain = domain

        n = len(vertices)
        self.is_boundary = np.zeros(n, dtype=bool)
        self.is_boundary[boundary_vertex_ids] = True
        self.interior_ids = np.flatnonzero(~self.is_boundary)

        p0 = vertices[triangles[:, 0]]
        p1 = vertices[triangles[:, 1]]
        p2 = vertices[triangles[:, 2]]
        self.tri_areas = 0.5 * np.abs(
            (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
            - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))
        # gradients of the three hat functions on each triangle:
        # grad lambda_i = rot90(p_{i+2} - p_{i+1}) / (2 area)
        edges = np.stack([p2 - p1, p0 - p2, p1 - p0], axis=1)  # (m,3,2)
        grad_hat = np.stack([-edges[:, :, 1], edges[:, :, 0]], axis=2)
        grad_hat /= (2.0 * self.tri_areas)[:, None, None]
        self.grad_hat = np.ascontiguousarray(grad_hat)

        self._locator = Delaunay(vertices)
        self._neighbors = None

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def neighbor_sets(self):
        if self._neighbors is None:
            nbrs = [set() for _ in range(self.n_vertices)]
            for a, b, c in self.triangles:
                nbrs[a].update((b, c))
                nbrs[b].update((a, c))
                nbrs[c].update((a, b))
            self._neighbors = nbrs
        return self._neighbors

    def barycentric(self, points):
        """Locate points and return (simplex_index, weights, vertex_ids).

        simplex_index is -1 for points outside the hull.
        """
        pts = np.atleast_2d(points)
        simplex = self._locator.find_simplex(pts, tol=1e-10)
        ok = simplex >= 0
        weights = np.zeros((len(pts), 3))
        verts = np.zeros((len(pts), 3), dtype=int)
        if np.any(ok):
            trans = self._locator.transform[simplex[ok]]
            delta = pts[ok] - trans[:, 2]
            bary2 = np.einsum("nij,nj->ni", trans[:, :2], delta)
            weights[ok, :2] = bary2
            weights[ok, 2] = 1.0 - bary2.sum(axis=1)
            verts[ok] = self._locator.simplices[simplex[ok]]
        return simplex, weights, verts

    def interpolate(self, values, points):
        """P1 interpolation of nodal values at arbitrary interior points."""
        simplex, weights, verts = self.barycentric(points)
        if np.any(simplex < 0):
            raise ValueError("point outside the triangulation")
        return np.einsum("nk,nk->n", weights, values[verts])


def triangulate(spec, h, _jitter_seed=None):
    """Triangulate the domain at target edge length h.

    Raises MeshQualityFailure if the minimum triangle angle stays below
    20 degrees even after one retry with a jittered interior lattice.
    """
    if not 0 < h < geometry.inradius(spec):
        raise ValueError("h must lie in (0, inradius)")

    mesh = _build(spec, h, jitter_seed=_jitter_seed)
    if _min_angle_deg(mesh) < MIN_ANGLE_DEG:
        mesh = _build(spec, h, jitter_seed=20250808)
        angle = _min_angle_deg(mesh)
        if angle < MIN_ANGLE_DEG:
            raise MeshQualityFailure(
                f"min angle {angle:.2f} deg < {MIN_ANGLE_DEG} after retry")
    return mesh


def vertex_neighbors(mesh, vertex_id):
    """Ids adjacent to vertex_id through a triangle edge, sorted."""
    if not 0 <= vertex_id < mesh.n_vertices:
        raise UnknownVertex(f"vertex {vertex_id}")
    return sorted(mesh.neighbor_sets()[vertex_id])


def mesh_to_csv(mesh, vertices_path, triangles_path):
    """Write `id,x,y,is_boundary,arclength` and `v0,v1,v2` tables."""
    with open(vertices_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "is_boundary", "arclength"])
        for i, (x, y) in enumerate(mesh.vertices):
            s = mesh.boundary_param.get(i, "")
            writer.writerow([i, repr(float(x)), repr(float(y)),
                             int(mesh.is_boundary[i]),
                             repr(float(s)) if s != "" else ""])
    with open(triangles_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["v0", "v1", "v2"])
        for tri in mesh.triangles:
            writer.writerow([int(v) for v in tri])


# ---------------------------------------------------------------------------
# construction internals
# ---------------------------------------------------------------------------

def _build(spec, h, jitter_seed=None):
    boundary_xy, boundary_s, boundary_t = _boundary_ring(spec, h)
    lattice = _interior_lattice(spec, h, jitter_seed)
    points = np.vstack([boundary_xy, lattice])
    nb = len(boundary_xy)

    tri = Delaunay(points)
    simplices = tri.simplices.copy()

    # enforce positive orientation
    p0 = points[simplices[:, 0]]
    p1 = points[simplices[:, 1]]
    p2 = points[simplices[:, 2]]
    signed = ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
              - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))
    flip = signed < 0
    simplices[flip, 1], simplices[flip, 2] = (
        simplices[flip, 2].copy(), simplices[flip, 1].copy())

    # drop any triangle whose centroid escapes the domain (slivers across
    # boundary chords; none arise for convex domains but stay defensive)
    centroids = points[simplices].mean(axis=1)
    keep = geometry.contains_many(spec, centroids)
    simplices = simplices[keep]

    boundary_ids = np.arange(nb)
    boundary_param = {int(i): float(boundary_s[i]) for i in range(nb)}
    return Mesh(points, simplices, boundary_ids, boundary_param,
                boundary_t, h, spec)


def _boundary_ring(spec, h):
    # ring spacing 0.55h: the inscribed polygon then loses O((0.55h)^2)
    # area, small enough that total mesh area converges at the advertised
    # tolerances; spacing h itself would leave a (pi/6) h^2 defect
    nb = max(16, int(np.ceil(spec.perimeter / (0.55 * h))))
    nb += (-nb) % 4  # multiple of 4 keeps mirror images on the ring
    pts = geometry.boundary_sample(spec, nb)
    xy = np.array([p.position for p in pts])
    s = np.array([p.arclength for p in pts])
    t = np.array([p.t for p in pts])
    xy = _symmetrize_ring(spec, xy)
    return xy, s, t


def _symmetrize_ring(spec, xy):
    """Make ring coordinates bitwise mirror-symmetric when the curve is.

    Arclength spacing puts sample k at s = k*P/nb starting from t=0, so
    mirrors map ring indices onto ring indices: k <-> nb-k across the
    x-axis and k <-> nb/2-k across the y-axis. Rebuilding the other
    quadrants from quadrant one by explicit sign flips keeps the mirror
    exact in floating point (the analytic positions already agree to
    ~1e-15). Positions move by at most that much, far below the
    on-boundary tolerance.
    """
    x_mirror, y_mirror = spec.mirror_symmetries()
    nb = len(xy)
    out = xy.copy()
    if y_mirror and x_mirror and nb % 4 == 0:
        q = nb // 4
        out[0, 1] = 0.0
        out[q, 0] = 0.0
        out[2 * q] = (-out[0, 0], 0.0)
        out[3 * q] = (0.0, -out[q, 1])
        for k in range(1, q):
            xk, yk = out[k]
            out[2 * q - k] = (-xk, yk)
            out[2 * q + k] = (-xk, -yk)
            out[nb - k] = (xk, -yk)
    elif y_mirror and nb % 2 == 0:
        out[0, 1] = 0.0
        out[nb // 2, 1] = 0.0
        for k in range(1, nb // 2):
            out[nb - k] = (out[k, 0], -out[k, 1])
    return out


def _interior_lattice(spec, h, jitter_seed=None):
    poly = spec._polygon
    xmax = np.abs(poly[:, 0]).max() + h
    ymax = np.abs(poly[:, 1]).max() + h
    dy = h * np.sqrt(3.0) / 2.0
    jmax = int(np.ceil(ymax / dy))
    imax = int(np.ceil(xmax / h)) + 1

    rows = []
    for j in range(-jmax, jmax + 1):
        y = j * dy
        if j % 2 == 0:
            xs = np.arange(-imax, imax + 1, dtype=float) * h
        else:
            xs = (np.arange(-imax, imax, dtype=float) + 0.5) * h
        rows.append(np.stack([xs, np.full_like(xs, y)], axis=1))
    pts = np.vstack(rows)

    if jitter_seed is not None:
        rng = np.random.default_rng(jitter_seed)
        pts = pts + rng.uniform(-0.05 * h, 0.05 * h, size=pts.shape)

    inside = geometry.contains_many(spec, pts)
    pts = pts[inside]
    depth = spec.distance_to_boundary(pts)
    return pts[depth > 0.5 * h]


def _min_angle_deg(mesh):
    p = mesh.vertices[mesh.triangles]  # (m,3,2)
    angles = []
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.sum(u * v, axis=1) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
    return float(np.min(angles))
