"""Tests for vertex stars: construction, orientation, degeneracy and metrics.

Oracles: hand-computed edge lengths and fan angles of small planar stars,
and nets on surfaces of revolution whose vertex positions are known.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvnet import surface as sf
from curvnet.errors import DegenerateStarError
from curvnet.netgen import revolution_net
from curvnet.star import (COLLINEAR, FOLDED, OK, SHORT_EDGE, build_star, build_stars, check_sampling, framed_edges,
                          sampling_flags, star_from_vectors, star_metrics, write_star_obj)

PLUS = [(1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0)]
UP = (0, 0, 1)


def test_plus_star_is_valid_and_regular():
    s = star_from_vectors(PLUS, UP)
    assert s.valid[0] and s.k == 4 and s.m == 1
    assert list(s.family[0]) == [1, 2, 1, 2]
    met = star_metrics(s, K=1.0)
    assert met.eps[0] == 1.0 and met.rho[0] == 1.0
    # 1 <= 1 / (16 K rho^2) fails, the weaker forms 1 <= 1/(2K rho) too
    assert not met.sampling_ok[0] and not met.weak_rho[0] and not met.weak_K[0]


def test_neighbour_rolls():
    s = star_from_vectors(PLUS, UP)
    assert np.array_equal(s.F[0, 0], PLUS[1])
    assert np.array_equal(s.G[0, 0], PLUS[3])
    assert s.triangles().tolist() == [[0, 1], [1, 2], [2, 3], [3, 0]]


def test_clockwise_order_is_a_fold():
    assert star_from_vectors(PLUS[::-1], UP).status[0] == FOLDED


def test_degenerate_stars_are_flagged():
    assert star_from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 0), (0, -1, 0)], UP).status[0] == SHORT_EDGE
    assert star_from_vectors([(1, 0, 0), (2, 0, 0), (-1, 0.1, 0), (0, -1, 0)], UP).status[0] == COLLINEAR


def test_rho_of_a_skewed_star():
    # edges of lengths 1, 2, 1, 2; with the 45 degree fan pair the regularity is driven by
    # |e||f|/|e x f| = 2 / (2 sin 45) = sqrt 2, and eps/|e| = 2
    E = [(1, 0, 0), (math.sqrt(2), math.sqrt(2), 0), (-1, 0, 0), (0, -2, 0)]
    met = star_metrics(star_from_vectors(E, UP))
    assert met.eps[0] == pytest.approx(2.0)
    assert met.rho[0] == pytest.approx(2.0)
    assert met.sampling_ok is None


def test_intrinsic_lengths_drive_eps():
    met = star_metrics(star_from_vectors(PLUS, UP, lengths=[1.0, 1.0, 3.0, 1.0]))
    assert met.eps[0] == 3.0 and met.rho[0] == 3.0


def test_sampling_flags_thresholds():
    ok, wr, wk = sampling_flags([1 / 16, 1 / 15], [1.0, 1.0], 1.0)
    assert ok.tolist() == [True, False] and wr.all() and wk.all()
    assert all(a.all() for a in sampling_flags([5.0], [9.0], 0.0))


def test_framed_edges_of_axis_aligned_star():
    fe = framed_edges(star_from_vectors(PLUS, UP, v1=(1, 0, 0)))
    assert np.allclose(fe.x, [[1, 0, -1, 0]]) and np.allclose(fe.y, [[0, 1, 0, -1]])
    assert np.allclose(fe.d, 0)


def test_build_stars_on_torus_net_match_positions():
    ch = sf.torus(2.0, 0.5)
    net = revolution_net(ch, 16, 8)
    stars = build_stars(net)
    assert len(stars) == 1 and stars[0].m == net.n_vertices and stars[0].k == 4
    s = stars[0]
    assert np.all(s.valid)
    far = s.p[:, None, :] + s.E
    d = np.linalg.norm(far[:, :, None, :] - net.position[None, None], axis=-1).min(-1)
    assert d.max() < 1e-14
    # every meridian edge is family 2 on this torus chart and the lengths are r * 2pi / 8
    lens = s.lengths[s.family == 2]
    assert np.allclose(lens, 0.5 * 2 * math.pi / 8)


def test_build_star_rejects_boundary_and_degenerate(tmp_path):
    net = revolution_net(sf.cylinder(1.0, 1.0), 8, 4)
    bnd = int(np.flatnonzero(net.status != 0)[0])
    with pytest.raises(ValueError):
        build_star(net, bnd)
    inner = int(net.interior_ids[0])
    s = build_star(net, inner)
    assert s.status[0] == OK
    write_star_obj(s, tmp_path / "s.obj")
    txt = (tmp_path / "s.obj").read_text().splitlines()
    assert sum(t.startswith("v ") for t in txt) == 5 and sum(t.startswith("f ") for t in txt) == 4
    net.position[net.edges[net.incident(inner)[0]]] = net.position[inner]  # collapse an edge
    with pytest.raises(DegenerateStarError):
        build_star(net, inner)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(-math.pi, math.pi))
def test_metrics_are_scale_and_rotation_covariant(scale, angle):
    E = np.array([(1, 0.1, 0.05), (-0.2, 0.9, -0.1), (-1.1, 0.0, 0.02), (0.1, -1.2, 0.0)])
    c, s = math.cos(angle), math.sin(angle)
    R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    a = star_metrics(star_from_vectors(E, UP))
    b = star_metrics(star_from_vectors(scale * E @ R.T, UP))
    assert b.eps[0] == pytest.approx(scale * a.eps[0], rel=1e-12)
    assert b.rho[0] == pytest.approx(a.rho[0], rel=1e-12)


# ---------------------------------------------------------------- sampling condition


def test_sampling_on_plane_passes_everywhere():
    ch = sf.plane(1.0)
    rep = check_sampling(revolution_net(ch, 9, 9), sf.estimate_bounds(ch))
    assert rep.K == 0 and len(rep.ok) == 49 and rep.ok.all()


def test_sampling_on_fine_sphere_net_passes():
    ch = sf.sphere(1.0)
    rep = check_sampling(revolution_net(ch, 600, 200), sf.estimate_bounds(ch))
    assert rep.eps.max() == pytest.approx(0.0105, abs=1e-4)
    # direct arithmetic with the measured rho
    assert np.array_equal(rep.ok, rep.eps * 16 * rep.K * rep.rho**2 <= 1)
    assert rep.fraction == 1.0


def test_sampling_on_coarse_sphere_net_fails():
    ch = sf.sphere(1.0)
    rep = check_sampling(revolution_net(ch, 30, 10), sf.estimate_bounds(ch))
    assert rep.eps.min() > 0.2 and not rep.ok.any()
    assert rep.weak_K.all()  # 0.23 <= 1/(2K) still holds
