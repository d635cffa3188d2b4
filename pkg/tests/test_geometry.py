import numpy as np
import pytest
from scipy.integrate import quad

from mcflow.errors import ConfigError, NonConvex
from mcflow.geometry import (
    Ellipse, FourierCurve, boundary_sample, contains, curvature, from_config,
    inradius, kappa_max, to_config,
)


def test_ellipse_curvature_closed_form():
    e = Ellipse(2.0, 1.0)
    assert curvature(e, 0.0) == pytest.approx(2.0, abs=1e-12)      # a/b^2
    assert curvature(e, np.pi / 2) == pytest.approx(0.25, abs=1e-12)  # b/a^2


def test_unit_disk_curvature_is_one():
    disk = Ellipse(1.0, 1.0)
    for t in np.linspace(0, 2 * np.pi, 17):
        assert curvature(disk, t) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("spec,expected", [
    (Ellipse(2.0, 1.0), 2.0),
    (Ellipse(1.0, 1.0), 1.0),
])
def test_kappa_max_closed_form(spec, expected):
    assert kappa_max(spec) == pytest.approx(expected, rel=1e-10)


def test_kappa_max_fourier_vs_dense_brute_force():
    spec = FourierCurve(1.0, [(2, 0.1, 0.0)])
    t = np.linspace(0, 2 * np.pi, 1_000_000, endpoint=False)
    brute = curvature(spec, t).max()
    assert kappa_max(spec) == pytest.approx(brute, rel=1e-8)


def test_kappa_max_rejects_small_sample():
    with pytest.raises(ValueError):
        kappa_max(Ellipse(1, 1), n_samples=32)


@pytest.mark.parametrize("spec,expected", [
    (Ellipse(2.0, 1.0), 1.0),
    (Ellipse(1.0, 1.0), 1.0),
])
def test_inradius_closed_form(spec, expected):
    assert inradius(spec) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("spec", [
    Ellipse(2.0, 1.0),
    Ellipse(1.0, 1.0),
    FourierCurve(1.0, [(2, 0.1, 0.0)]),
    FourierCurve(1.0, [(3, 0.0, 0.04), (2, 0.05, 0.0)]),
])
def test_inradius_at_least_rolling_disk(spec):
    # a disk of radius 1/kappa_max rolls inside any convex curve
    assert inradius(spec) >= 1.0 / kappa_max(spec) - 1e-6


def test_boundary_sample_circle_quarters():
    pts = boundary_sample(Ellipse(1.0, 1.0), 16)
    quarter = pts[4].position
    assert np.allclose(pts[0].position, [1, 0], atol=1e-9)
    assert np.allclose(quarter, [0, 1], atol=1e-9)
    assert np.allclose(pts[8].position, [-1, 0], atol=1e-9)
    assert np.allclose(pts[12].position, [0, -1], atol=1e-9)


def test_boundary_sample_perimeter_matches_quadrature():
    e = Ellipse(2.0, 1.0)
    pts = boundary_sample(e, 256)
    perimeter, err = quad(
        lambda t: np.hypot(-2 * np.sin(t), np.cos(t)), 0, 2 * np.pi,
        epsabs=1e-12, limit=200)
    assert err < 1e-8
    # the 256 arclength segments are equal by construction and sum to the
    # perimeter; check the table against the adaptive-quadrature oracle
    arc_segments = np.diff([p.arclength for p in pts] + [e.perimeter])
    assert np.allclose(arc_segments, perimeter / 256, atol=1e-10)
    assert arc_segments.sum() == pytest.approx(perimeter, abs=1e-6)
    assert e.perimeter == pytest.approx(perimeter, abs=1e-10)
    # straight chords undershoot each arc by O(h^2); bound the defect
    xy = np.array([p.position for p in pts])
    chords = np.linalg.norm(np.roll(xy, -1, axis=0) - xy, axis=1)
    assert 0 < perimeter - chords.sum() < 1e-3


@pytest.mark.parametrize("spec", [
    Ellipse(2.0, 1.0),
    FourierCurve(1.0, [(2, 0.1, 0.0)]),
])
def test_boundary_sample_normals(spec):
    pts = boundary_sample(spec, 64)
    c = spec.centroid
    for p in pts:
        assert np.linalg.norm(p.outward_normal) == pytest.approx(1.0, abs=1e-12)
        # outward means positive dot with (position - centroid) on convex curves
        assert np.dot(p.outward_normal, p.position - c) > 0
        tangent = spec.velocity(p.t)
        tangent /= np.linalg.norm(tangent)
        assert abs(np.dot(p.outward_normal, tangent)) < 1e-10


def test_boundary_sample_equal_arclength_spacing():
    spec = Ellipse(2.0, 1.0)
    pts = boundary_sample(spec, 64)
    s = np.array([spec.arclength(p.t) for p in pts])
    target = np.arange(64) * spec.perimeter / 64
    assert np.max(np.abs(s - target)) < 1e-10 * spec.perimeter


def test_contains_basic_points():
    disk = Ellipse(1.0, 1.0)
    assert contains(disk, (0.0, 0.0))
    assert not contains(disk, (2.0, 0.0))
    assert contains(Ellipse(2.0, 1.0), (1.99, 0.0))


def test_convexity_sampled_everywhere():
    rng = np.random.default_rng(7)
    for spec in (Ellipse(2, 1), FourierCurve(1.0, [(2, 0.1, 0.0)])):
        t = rng.uniform(0, 2 * np.pi, 10_000)
        assert np.all(curvature(spec, t) > 0)


def test_constructor_rejects_nonconvex_fourier():
    # amplitude 0.5 at harmonic 3 dents the curve inward
    with pytest.raises(NonConvex):
        FourierCurve(1.0, [(3, 0.5, 0.0)])


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_kappa_max_scaling(lam):
    base = FourierCurve(1.0, [(2, 0.1, 0.0)])
    scaled = FourierCurve(lam * 1.0, [(2, lam * 0.1, 0.0)])
    assert kappa_max(scaled) == pytest.approx(kappa_max(base) / lam, rel=1e-8)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_inradius_scaling(lam):
    base = Ellipse(2.0, 1.0)
    scaled = Ellipse(2.0 * lam, 1.0 * lam)
    assert inradius(scaled) == pytest.approx(lam * inradius(base), abs=1e-6)


def test_closed_curve_endpoints_match():
    for spec in (Ellipse(2, 1), FourierCurve(1.0, [(2, 0.1, 0.0)])):
        assert np.allclose(spec.position(0.0), spec.position(2 * np.pi),
                           atol=1e-12)


def test_config_round_trip():
    spec = from_config({"kind": "ellipse", "a": 2.0, "b": 1.0})
    assert isinstance(spec, Ellipse)
    assert to_config(spec) == {"kind": "ellipse", "a": 2.0, "b": 1.0}
    spec2 = from_config({"kind": "fourier", "r0": 1.0,
                         "harmonics": [[2, 0.1, 0.0]]})
    assert isinstance(spec2, FourierCurve)
    round_tripped = from_config(to_config(spec2))
    assert round_tripped.harmonics == spec2.harmonics
    with pytest.raises(ConfigError):
        from_config({"kind": "square"})
    with pytest.raises(ConfigError):
        from_config({"kind": "ellipse", "a": 1.0})
