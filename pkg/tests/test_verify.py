"""Tests for the bound predicates and the pointwise checks.

Oracles: hand-computed predicate values on small stars, deliberately
violated bounds (too small a curvature bound ``K``), the closed-form geodesic
curvature of torus parallels, and the skip bookkeeping on nets with
boundary and sampling violations.
"""

import math

import numpy as np
import pytest

from curvnet import surface as sf
from curvnet.curvature import edge_curvatures, vertex_curvatures
from curvnet.harness.pipeline import analyze_net
from curvnet.netgen import revolution_net
from curvnet.star import star_from_vectors, star_metrics
from curvnet.surface import SurfaceBounds
from curvnet.verify import (CHECKS, FAIL, PASS, RATIOS, RECORD, SKIP, SKIP_REASONS, CheckResult,
                            check_geodesic_identity, ratio_sequence_bounded, run_checks)

UP = (0, 0, 1)


def checks_for(star, K, Kp=0.0):
    ec = edge_curvatures(star)
    return run_checks(star, ec, vertex_curvatures(star, "sin", ec), star_metrics(star, K), SurfaceBounds(K, Kp, 64))


def test_compare_uses_relative_slack():
    r = CheckResult.compare("x", [1.0, 1.0 + 1e-10, 1.0 + 1e-8, 2.0], 1.0, np.array([0, 0, 0, 3]))
    assert r.status.tolist() == [PASS, PASS, FAIL, SKIP]
    rec = CheckResult.record("y", [0.5, 0.7], np.array([0, 1]))
    assert rec.status.tolist() == [RECORD, SKIP] and np.isnan(rec.rhs).all()


def test_flat_plus_star_values():
    s = star_from_vectors([(1e-3, 0, 0), (0, 1e-3, 0), (-1e-3, 0, 0), (0, -1e-3, 0)], UP, k1=0.0, k2=0.0)
    res = checks_for(s, K=1.0)
    assert set(CHECKS + RATIOS) <= set(res)
    for name in CHECKS:
        assert res[name].status[0] == PASS, name
    assert res["area_upper"].lhs[0] == pytest.approx(0.5e-6)
    assert res["area_lower_three"].rhs[0] == 4  # all four edges are large
    assert res["delaunay_count"].rhs[0] == 4
    assert res["height"].lhs[0] == 0 and res["tangential"].lhs[0] == 0
    assert res["edge_estimate_eps3"].status[0] == RECORD and res["edge_estimate_eps3"].lhs[0] == 0


def test_bent_star_violates_the_height_bound_for_too_small_K():
    # a star on a sphere of radius 1 claims K = 0.1: height |e_n| / |e|^2 ~ 1/2 > 0.1
    R, t = 1.0, 0.01
    pts = [(math.sin(t) * math.cos(a), math.sin(t) * math.sin(a), math.cos(t) - 1) for a in np.arange(4) * math.pi / 2]
    s = star_from_vectors(pts, (0, 0, -1)[::1] if False else (0, 0, 1), k1=-1 / R, k2=-1 / R)
    res = checks_for(s, K=0.1)
    assert res["height"].status[0] == FAIL
    res = checks_for(s, K=1.05)
    assert res["height"].status[0] == PASS and res["normal_angle"].status[0] == PASS


def test_sampling_violation_is_skipped_not_failed():
    s = star_from_vectors([(1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0)], UP, k1=0.0, k2=0.0)
    res = checks_for(s, K=1.0)  # eps = 1 violates eps <= 1/16
    for name in CHECKS:
        assert res[name].status[0] == SKIP
        assert SKIP_REASONS[int(res[name].reason[0])] == "sampling violated"


def test_valence_three_skips_valence_four_statements():
    s = star_from_vectors([(1e-3, 0, 0), (-5e-4, 8.66e-4, 0), (-5e-4, -8.66e-4, 0)], UP, k1=0.0, k2=0.0)
    res = checks_for(s, K=1.0)
    assert SKIP_REASONS[int(res["delaunay_count"].reason[0])] == "valence not 4"
    assert res["area_upper"].status[0] == PASS


def test_torus_net_has_no_violations_and_is_not_vacuous():
    ch = sf.torus(2.0, 0.5)
    an = analyze_net(revolution_net(ch, 640, 128), sf.estimate_bounds(ch, 64))
    counts = an.report.counts()
    assert sum(an.report.violations().values()) == 0
    # the outer half of the torus satisfies the sampling condition at this resolution
    assert an.sampling_ok.mean() > 0.25
    for name in ("area_upper", "delaunay_count", "normal_angle", "gauss_bound", "height", "tangential",
                 "tangent_deviation"):
        assert counts[name]["pass"] > 10000, name


def test_boundary_vertices_are_not_analyzed_but_reported_as_skipped_when_forced():
    ch = sf.cylinder(1.0, 1.0)
    net = revolution_net(ch, 64, 16)
    an = analyze_net(net, sf.estimate_bounds(ch, 64))
    assert set(an.vids.tolist()) == set(net.interior_ids.tolist())


def test_geodesic_identity_on_torus(rng):
    ch = sf.torus(2.0, 0.5)
    b = sf.estimate_bounds(ch, 64)
    for uv in rng.uniform([0, 0], [2 * math.pi, 2 * math.pi], size=(20, 2)):
        r = check_geodesic_identity(ch, uv, b.Kp)
        assert r["status"] == "pass", r
        assert r["rel_err"] <= 1e-3


def test_torus_parallel_geodesic_curvature_closed_form():
    # the parallels (v1 lines of this chart) at tube angle v have kg = sin(v) / (R + r cos v)
    R, r, v = 2.0, 0.5, 0.7
    res = check_geodesic_identity(sf.torus(R, r), (0.3, v))
    assert abs(res["kg"]) == pytest.approx(math.sin(v) / (R + r * math.cos(v)), rel=1e-10)


def test_geodesic_identity_skips_umbilics():
    assert check_geodesic_identity(sf.sphere(1.0), (0.1, 0.2))["status"] == "skip"


def test_ratio_sequence_bounded():
    assert ratio_sequence_bounded([1.0, 1.4, 2.0, 2.9])
    assert not ratio_sequence_bounded([1.0, 1.6, 3.0])
    assert ratio_sequence_bounded([1.0, 0.2, 0.9])  # below the coarsest value
    assert ratio_sequence_bounded([float("nan"), 1.0])
