"""Tests for analytic charts and their pointwise geometry.

Oracles used here are independent of the closed-form machinery in
``curvnet.surface``: classical formulas for spheres, cylinders and tori, and
finite differences of the position map.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvnet import surface as sf
from curvnet.errors import ConfigError, ImmersionError, UmbilicAmbiguityError

CHARTS = {
    "sphere": sf.sphere(1.3),
    "cylinder": sf.cylinder(0.7, 2.0),
    "torus": sf.torus(2.0, 0.5),
    "spheroid": sf.spheroid(1.3, 0.9),
    "triaxial": sf.triaxial_ellipsoid(2.0, 1.5, 1.0),
    "monge": sf.monge_patch({(2, 0): 0.5, (0, 2): 0.2, (3, 0): 0.3, (1, 2): -0.4, (1, 1): 0.1}, 0.8),
    "plane": sf.plane(1.0),
}


def random_uv(chart, n, rng):
    u0, u1, v0, v1 = chart.domain
    return np.column_stack([rng.uniform(u0, u1, n), rng.uniform(v0, v1, n)])


# ---------------------------------------------------------------- examples


def test_sphere_is_umbilic_with_inverse_radius():
    p = sf.eval_point(sf.sphere(2.0), (1.1, 0.4))
    assert p.k1 == pytest.approx(0.5, abs=1e-14)
    assert p.k2 == pytest.approx(0.5, abs=1e-14)
    assert p.umbilic


def test_cylinder_axial_and_circumferential_curvature():
    p = sf.eval_point(sf.cylinder(1.0), (0.3, 0.2))
    assert p.k1 == pytest.approx(0.0, abs=1e-15)
    assert p.k2 == pytest.approx(1.0, abs=1e-14)
    assert abs(p.v1[2]) == pytest.approx(1.0)  # axial direction carries k1
    # normal is radial (the sign convention makes the curvature positive)
    radial = np.array([math.cos(0.3), math.sin(0.3), 0.0])
    assert abs(np.dot(p.n, radial)) == pytest.approx(1.0)
    assert np.dot(p.n, radial) < 0


def test_triaxial_pole_matches_height_function_hessian():
    a, b, c = 2.0, 1.5, 1.0
    # independent oracle: central-difference Hessian of z = c sqrt(1 - x^2/a^2 - y^2/b^2)
    h = 1e-4
    z = lambda x, y: c * math.sqrt(1 - x * x / a**2 - y * y / b**2)
    hxx = (z(h, 0) - 2 * z(0, 0) + z(-h, 0)) / h**2
    hyy = (z(0, h) - 2 * z(0, 0) + z(0, -h)) / h**2
    assert -hxx == pytest.approx(0.25, rel=1e-6)
    assert -hyy == pytest.approx(1 / 2.25, rel=1e-6)
    p = sf.eval_point(sf.triaxial_ellipsoid(a, b, c), (math.pi / 2, 0.0))
    np.testing.assert_allclose(p.position, [0, 0, 1], atol=1e-15)
    assert p.k1 == pytest.approx(0.25, rel=1e-12)
    assert p.k2 == pytest.approx(1 / 2.25, rel=1e-12)


def test_torus_curvatures_closed_form():
    R, r = 2.0, 0.5
    chart = sf.torus(R, r)
    for th in np.linspace(0, 2 * np.pi, 13):
        p = sf.eval_point(chart, (0.7, th))
        kp = math.cos(th) / (R + r * math.cos(th))
        assert sorted([p.k1, p.k2]) == pytest.approx(sorted([kp, 1 / r]), abs=1e-13)


def test_triaxial_umbilics_are_umbilic():
    chart = sf.triaxial_ellipsoid(2.0, 1.5, 1.0)
    pts = sf.eval_points(chart, chart.umbilic_points())
    assert np.all(pts.umbilic)
    X = pts.position
    np.testing.assert_allclose(X[:, 1], 0, atol=1e-14)
    np.testing.assert_allclose((X**2 / np.array([4, 2.25, 1])).sum(1), 1, atol=1e-14)


def test_osculating_height_examples():
    flat = sf.eval_point(sf.plane(), (0.1, 0.2))
    assert sf.osculating_height(flat, 0.3, -0.2) == 0.0
    p = sf.eval_point(sf.sphere(2.0), (0.0, 0.0))
    assert sf.osculating_height(p, 0.1, 0.0) == pytest.approx(0.0025, abs=1e-15)
    p.k1, p.k2 = 1.0, 2.0
    assert sf.osculating_height(p, 1.0, 1.0) == pytest.approx(1.5)


def test_immersion_failure_at_coordinate_pole():
    chart = sf.sphere(1.0, lat=(-math.pi / 2, math.pi / 2))
    with pytest.raises(ImmersionError):
        sf.eval_point(chart, (0.0, math.pi / 2))


# ---------------------------------------------------------------- bounds


def test_bounds_sphere_cylinder_torus():
    b = sf.estimate_bounds(sf.sphere(1.0), 64)
    assert b.K == pytest.approx(1.05, rel=1e-12)
    assert b.Kp < 1e-8
    assert sf.estimate_bounds(sf.cylinder(0.5), 32).K == pytest.approx(2.1, rel=1e-12)
    # torus oracle: max over the tube angle of |cos t/(2 + 0.5 cos t)| and 1/r
    t = np.linspace(0, 2 * np.pi, 100001)
    kmax = max(np.max(np.abs(np.cos(t) / (2 + 0.5 * np.cos(t)))), 2.0)
    assert sf.estimate_bounds(sf.torus(2.0, 0.5), 64).K == pytest.approx(1.05 * kmax, rel=1e-12)


def test_bounds_reject_coarse_grid():
    with pytest.raises(ValueError):
        sf.estimate_bounds(sf.sphere(), 16)


@pytest.mark.parametrize("name", ["torus", "spheroid", "triaxial", "monge"])
def test_bounds_dominate_sampled_values(name):
    chart = CHARTS[name]
    b = sf.estimate_bounds(chart, 48)
    pts = sf.eval_points(chart, random_uv(chart, 4000, np.random.default_rng(3)))
    assert b.K >= np.max(np.abs([pts.k1, pts.k2]))
    ok = ~pts.umbilic
    grads = np.abs([pts.dk1_v1[ok], pts.dk1_v2[ok], pts.dk2_v1[ok], pts.dk2_v2[ok]])
    assert b.Kp >= np.max(grads)


def test_bounds_scaling_covariance():
    base = sf.torus(2.0, 0.5)
    b0 = sf.estimate_bounds(base, 32)
    for lam in (0.1, 3.0):
        b = sf.estimate_bounds(sf.TransformedChart(base=base, scale=lam), 32)
        assert b.K == pytest.approx(b0.K / lam, rel=1e-10)
        assert b.Kp == pytest.approx(b0.Kp / lam**2, rel=1e-6)


# ---------------------------------------------------------------- invariants


@pytest.mark.parametrize("name", sorted(CHARTS))
def test_frame_orthonormal_and_eigen_residual(name):
    chart = CHARTS[name]
    uv = random_uv(chart, 10_000, np.random.default_rng(11))
    pts = sf.eval_points(chart, uv)
    for a, b, want in [(pts.v1, pts.v1, 1), (pts.v2, pts.v2, 1), (pts.n, pts.n, 1), (pts.v1, pts.v2, 0)]:
        assert np.max(np.abs(np.einsum("ij,ij->i", a, b) - want)) < 1e-12
    assert np.max(np.abs(np.cross(pts.v1, pts.v2) - pts.n)) < 1e-12
    S = sf.shape_operator(chart, uv)
    scale = max(1.0, float(np.max(np.abs([pts.k1, pts.k2]))))
    for v, k in ((pts.v1, pts.k1), (pts.v2, pts.k2)):
        res = np.einsum("nij,nj->ni", S, v) - k[:, None] * v
        assert np.max(np.linalg.norm(res, axis=1)) <= 1e-9 * scale
    assert np.all(pts.k1 <= pts.k2)
    assert np.array_equal(pts.umbilic, np.abs(pts.dk) < chart.umbilic_tol)


def _fd_along(chart, uv, a, h, fn):
    fp = fn(sf.eval_points(chart, uv + h * a))
    fm = fn(sf.eval_points(chart, uv - h * a))
    return (fp - fm) / (2 * h)


@pytest.mark.parametrize("name", ["torus", "spheroid", "triaxial", "monge"])
def test_curvature_derivatives_match_finite_differences(name):
    chart = CHARTS[name]
    uv = random_uv(chart, 300, np.random.default_rng(5))
    # keep the FD stencil inside the domain and away from umbilics
    u0, u1, v0, v1 = chart.domain
    uv[:, 1] = np.clip(uv[:, 1], v0 + 0.01, v1 - 0.01)
    pts = sf.eval_points(chart, uv)
    keep = np.abs(pts.dk) > 1e-2
    uv, pts = uv[keep], pts[keep]
    fr = sf.principal_frames(chart, uv)
    h = 1e-4
    for fam, field in ((1, "v1"), (2, "v2")):
        a = sf.tangent_to_param(fr, getattr(pts, field))
        for which in ("k1", "k2"):
            fd = _fd_along(chart, uv, a, h, lambda p: getattr(p, which))
            exact = getattr(pts, f"d{which}_v{fam}")
            err = np.abs(fd - exact) / np.maximum(np.abs(exact), 1e-2)
            assert np.max(err) <= 1e-5, (which, fam)


@pytest.mark.parametrize("name", ["torus", "triaxial", "monge"])
def test_geodesic_curvature_matches_turning_of_principal_line(name):
    chart = CHARTS[name]
    uv = random_uv(chart, 200, np.random.default_rng(8))
    u0, u1, v0, v1 = chart.domain
    uv[:, 1] = np.clip(uv[:, 1], v0 + 0.01, v1 - 0.01)
    pts = sf.eval_points(chart, uv)
    keep = np.abs(pts.dk) > 5e-2
    uv, pts = uv[keep], pts[keep]
    fr = sf.principal_frames(chart, uv)
    h = 1e-4
    a1 = sf.tangent_to_param(fr, pts.v1)

    def v1_aligned(p):
        sgn = np.sign(np.einsum("ij,ij->i", p.v1, pts.v1))
        return p.v1 * sgn[:, None]

    dv1 = _fd_along(chart, uv, a1, h, v1_aligned)
    kg_fd = np.einsum("ij,ij->i", dv1, pts.v2)
    np.testing.assert_allclose(pts.kg1, kg_fd, rtol=0, atol=1e-6 * max(1, np.max(np.abs(kg_fd))))


def test_rigid_motion_equivariance():
    base = CHARTS["triaxial"]
    th = 0.7
    R = np.array([[math.cos(th), -math.sin(th), 0], [math.sin(th), math.cos(th), 0], [0, 0, 1.0]])
    ax = np.array([1.0, 2.0, 2.0]) / 3
    K = np.array([[0, -ax[2], ax[1]], [ax[2], 0, -ax[0]], [-ax[1], ax[0], 0]])
    R = R @ (np.eye(3) + math.sin(1.1) * K + (1 - math.cos(1.1)) * K @ K)
    moved = sf.TransformedChart(base=base, rotation=tuple(map(tuple, R)), translation=(1.0, -2.0, 0.5))
    uv = random_uv(base, 500, np.random.default_rng(2))
    p, q = sf.eval_points(base, uv), sf.eval_points(moved, uv)
    np.testing.assert_allclose(q.k1, p.k1, atol=1e-10)
    np.testing.assert_allclose(q.k2, p.k2, atol=1e-10)
    for f in ("v1", "v2", "n"):
        np.testing.assert_allclose(getattr(q, f), getattr(p, f) @ R.T, atol=1e-10)


@given(lam=st.floats(0.05, 20.0))
@settings(max_examples=25, deadline=None)
def test_scaling_covariance_of_curvatures(lam):
    base = CHARTS["monge"]
    uv = random_uv(base, 50, np.random.default_rng(0))
    p = sf.eval_points(base, uv)
    q = sf.eval_points(sf.TransformedChart(base=base, scale=lam), uv)
    np.testing.assert_allclose(q.k1 * lam, p.k1, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(q.k2 * lam, p.k2, rtol=1e-10, atol=1e-12)


@given(x=st.floats(-10, 10), y=st.floats(-10, 10), k1=st.floats(-5, 5), k2=st.floats(-5, 5))
def test_osculating_height_is_quadratic_form(x, y, k1, k2):
    p = sf.eval_point(sf.plane(), (0.0, 0.0))
    p.k1, p.k2 = k1, k2
    assert sf.osculating_height(p, x, y) == pytest.approx(0.5 * k1 * x * x + 0.5 * k2 * y * y)
    assert sf.osculating_height(p, -x, -y) == sf.osculating_height(p, x, y)


# ---------------------------------------------------------------- direction field


def test_direction_field_sign_continuity_on_cylinder():
    chart = sf.cylinder(1.0)
    np.testing.assert_allclose(sf.principal_direction_field(chart, (0.4, 0.5), 1, (0, 0, 1)), [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(sf.principal_direction_field(chart, (0.4, 0.5), 1, (0, 0, -1)), [0, 0, -1], atol=1e-15)


def test_direction_field_without_hint_is_smaller_eigenvector():
    chart = CHARTS["triaxial"]
    uv = (0.9, 0.4)
    d = sf.principal_direction_field(chart, uv, 1)
    # oracle: eigen-decomposition of the ambient shape operator
    S = sf.shape_operator(chart, np.array([uv]))[0]
    n = sf.eval_point(chart, uv).n
    w, V = np.linalg.eigh(S + 1e3 * np.outer(n, n))  # push the normal eigenvalue out of the way
    assert abs(np.dot(d, V[:, 0])) == pytest.approx(1.0, abs=1e-12)
    # deterministic: same answer twice, and the family-2 direction is n x v1
    np.testing.assert_array_equal(d, sf.principal_direction_field(chart, uv, 1))
    np.testing.assert_allclose(sf.principal_direction_field(chart, uv, 2), np.cross(n, d), atol=1e-14)


def test_direction_field_umbilic_needs_hint():
    chart = sf.sphere(1.0)
    with pytest.raises(UmbilicAmbiguityError):
        sf.principal_direction_field(chart, (0.1, 0.1), 1)
    d = sf.principal_direction_field(chart, (0.0, 0.0), 2, previous=(0.0, 1.0, 1.0))
    np.testing.assert_allclose(d, [0, 1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15)


# ---------------------------------------------------------------- config


def test_chart_from_config_kinds():
    t = sf.chart_from_config({"kind": "torus", "R": "2.0", "r": "0.5"})
    assert t.periodic == (True, True)
    s = sf.chart_from_config({"kind": "sphere", "R": "2", "domain": "0, 6.283185307179586, -0.5, 0.5"})
    assert s.domain[2:] == (-0.5, 0.5)
    m = sf.chart_from_config({"kind": "monge-patch", "c20": "0.5", "c02": "0.5", "half_width": "0.3"})
    p = sf.eval_point(m, (0, 0))
    assert p.k1 == pytest.approx(1.0) and p.k2 == pytest.approx(1.0)
    rev = sf.chart_from_config({"kind": "surface-of-revolution", "r_poly": "1.5", "r_cos": "1, 0.3",
                                "z_sin": "1, 0.3", "domain": "0, 6.283185307179586, 0, 6.283185307179586"})
    q = sf.eval_point(rev, (0.0, 0.0))
    assert q.k2 == pytest.approx(1 / 0.3)
    with pytest.raises(ConfigError):
        sf.chart_from_config({"kind": "klein-bottle"})
