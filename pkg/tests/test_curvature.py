"""Tests for discrete edge and vertex curvatures.

Oracles: the exact cylinder star (dihedral angle and circumcentric area in
closed form), hand-built hinges with a prescribed dihedral angle, the
circumcentric area from explicitly constructed circumcenters, the
Pythagorean relation between the curvature vector and the dihedral angle,
and smooth principal curvatures on refined nets.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hinges
from curvnet import surface as sf
from curvnet.curvature import (VARIANTS, angle_defect, circumcentric_area, circumcentric_area_unfolded,
                               curvature_vector, dihedral_angle, edge_curvatures, hinge_quantities,
                               integrated_edge_curvature, principal_estimates, select_area_maximizing,
                               triangle_subareas, vertex_area_and_mean, vertex_curvatures)
from curvnet.errors import AreaPositivityError, DegenerateTriangleError, NoSecondFaceError, VariantOverflowError
from curvnet.netgen import revolution_net
from curvnet.star import build_stars, star_from_vectors

UP = (0, 0, 1)


def hinge_star(a):
    """Star whose edge 0 is a hinge bent by the angle ``a`` toward the normal."""
    E = [(1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -math.cos(a), math.sin(a))]
    return star_from_vectors(E, UP)


# ---------------------------------------------------------------- cylinder oracle


def test_cylinder_axial_edge_is_exact(cyl_star):
    ec = edge_curvatures(cyl_star)
    axial = cyl_star.family[0] == 1
    assert np.all(np.abs(ec.theta[0, axial] - 0.2) <= 1e-12)
    assert np.all(np.abs(ec.A[0, axial] - 0.1 * math.sin(0.1)) <= 1e-12)


def test_cylinder_chord_edge_is_flat(cyl_star):
    ec = edge_curvatures(cyl_star)
    chord = cyl_star.family[0] == 2
    assert np.all(np.abs(ec.theta[0, chord]) <= 1e-12)
    assert np.all(np.abs(ec.k("sin")[0, chord]) <= 1e-12)


def test_cylinder_principal_estimates(cyl_star):
    k1, k2 = principal_estimates(cyl_star, "sin")
    assert k2 == pytest.approx(1.0, abs=1e-10)
    assert abs(k1) <= 1e-12
    # the other variants are off by the known factors theta/(2 sin(theta/2)) and tan/sin
    assert principal_estimates(cyl_star, "angle")[1] == pytest.approx(0.1 / math.sin(0.1), rel=1e-12)
    assert principal_estimates(cyl_star, "tan")[1] == pytest.approx(1 / math.cos(0.1), rel=1e-12)


# ---------------------------------------------------------------- edges


@pytest.mark.parametrize("a", [0.0, 0.3, -0.3, 1.2, -2.5])
def test_dihedral_angle_of_a_bent_hinge(a):
    s = hinge_star(a) if abs(a) < 1.5 else None
    if s is None or not s.valid[0]:
        # strongly folded hinges are not valid stars; check the raw hinge instead
        e, f, g = np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, -math.cos(a), math.sin(a)])
        assert float(hinge_quantities(e, f, g)["theta"]) == pytest.approx(a, abs=1e-14)
        return
    assert dihedral_angle(s, 0) == pytest.approx(a, abs=1e-14)


def test_integrated_edge_curvature_variants():
    assert integrated_edge_curvature(0.5, 2.0, "angle") == pytest.approx(1.0)
    assert integrated_edge_curvature(0.5, 2.0, "sin") == pytest.approx(4 * math.sin(0.25))
    assert integrated_edge_curvature(0.5, 2.0, "tan") == pytest.approx(4 * math.tan(0.25))
    with pytest.raises(VariantOverflowError):
        integrated_edge_curvature(math.pi - 1e-7, 1.0, "tan")
    with pytest.raises(ValueError):
        integrated_edge_curvature(math.pi, 1.0, "sin")
    with pytest.raises(ValueError):
        integrated_edge_curvature(0.1, 1.0, "cot")


@settings(max_examples=200, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(0.01, 10.0))
def test_variants_agree_to_third_order(theta, length):
    vals = [integrated_edge_curvature(theta, length, v) for v in VARIANTS]
    # angle <= tan and sin <= angle in absolute value, all with the sign of theta
    assert abs(vals[1]) <= abs(vals[0]) * (1 + 1e-15) <= abs(vals[2]) * (1 + 1e-15)
    assert max(vals) - min(vals) <= length * abs(theta) ** 3 / 4 / math.cos(min(abs(theta), 3.0) / 2) ** 2 + 1e-15


def test_single_edge_api_errors():
    s = star_from_vectors([(1, 0, 0), (0, 1, 0), (-1, 0, 0)], UP)
    s.boundary[0] = True
    with pytest.raises(NoSecondFaceError):
        dihedral_angle(s, 0)
    flat = star_from_vectors([(1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0)], UP)
    flat.E[0, 1] = (2, 0, 0)
    with pytest.raises(DegenerateTriangleError):
        curvature_vector(flat, 0)


def test_square_circumcentric_area():
    s = star_from_vectors([(1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0)], UP)
    c = circumcentric_area(s, 0)
    assert c["A"] == pytest.approx(0.5) and c["Aef"] == pytest.approx(0.25) and c["sgn"] == 1
    assert c["alpha"] == pytest.approx(math.pi / 4)
    A_p, H_p = vertex_area_and_mean(s)
    assert A_p[0] == pytest.approx(1.0) and H_p[0] == 0.0  # the Voronoi cell of the plus star


def test_triangle_subareas_sum_to_area(rng):
    e, f = rng.normal(size=(50, 3)), rng.normal(size=(50, 3))
    sub = triangle_subareas(e, f)
    assert np.allclose(sub.sum(-1), 0.5 * np.linalg.norm(np.cross(e, f), axis=-1), rtol=1e-10)


def test_hinge_identities_on_random_hinges(rng):
    e, f, g = random_hinges(rng, 2000)
    q = hinge_quantities(e, f, g)
    le = np.linalg.norm(e, axis=-1)
    knorm = np.linalg.norm(q["kvec"], axis=-1)
    assert np.max(np.abs(knorm - 2 * np.abs(np.sin(q["theta"] / 2)) * le) / le) < 1e-10
    assert np.max(np.abs(np.einsum("ij,ij->i", q["kvec"], e)) / le**2) < 1e-10
    assert np.max(np.abs(q["A"] - circumcentric_area_unfolded(e, f, g)) / le**2) < 1e-10


# ---------------------------------------------------------------- vertices


def test_angle_defect_of_a_cube_corner():
    s = star_from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 1)], (1, 1, 1))
    assert angle_defect(s)[0] == pytest.approx(math.pi / 2)
    assert angle_defect(star_from_vectors([(1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0)], UP))[0] == pytest.approx(0)


def test_selection_breaks_ties_by_lowest_edge_id():
    s = star_from_vectors([(1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0)], UP)
    s.eids[0] = [7, 3, 5, 1]
    pos = select_area_maximizing(s)
    assert pos[0].tolist() == [2, 3]  # family 1: ids 7, 5 -> 5 ; family 2: ids 3, 1 -> 1
    s.umbilic[0] = True
    assert select_area_maximizing(s)[0].tolist() == [3, 3]


def test_non_positive_chosen_area_raises():
    E = [(1, 0, 0), (0.3, 0.2, 0), (-1, 0, 0), (0.3, -0.2, 0)]
    s = star_from_vectors(E, UP, family=[1, 2, 2, 2])
    vc = vertex_curvatures(s)
    assert not vc.area_ok[0] and math.isnan(vc.k2[0])
    with pytest.raises(AreaPositivityError):
        principal_estimates(s)


@pytest.mark.parametrize("variant", VARIANTS)
def test_torus_estimates_converge(variant):
    ch = sf.torus(2.0, 0.5)
    errs = []
    for n in (16, 32, 64):
        net = revolution_net(ch, 4 * n, n)
        s = build_stars(net)[0]
        vc = vertex_curvatures(s, variant)
        errs.append(max(np.max(np.abs(vc.k1 - s.k1)), np.max(np.abs(vc.k2 - s.k2))))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 0.8), errs
