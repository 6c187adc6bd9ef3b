"""Tests for net generation: parameter-line grids, tracing, traced and umbilic nets.

Oracles: closed-form positions and arc lengths of meridians/parallels,
closed curvature lines of the torus, step-halving self-consistency, the
principal direction field itself (tangent alignment), the combinatorial
invariants of nets of curvature lines, and angular-scan counts of umbilic
separatrices.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvnet import surface as sf
from curvnet.errors import PatternValidationError, UmbilicAmbiguityError, UnsupportedChartError
from curvnet.netgen import (INTERIOR, TraceConfig, arc_length, classify_umbilic, filler_directions, read_net,
                            revolution_net, seed_lattice, trace_principal_line, traced_net, umbilic_net,
                            umbilic_patch, write_net, write_net_obj)

# ---------------------------------------------------------------- parameter-line grids


def test_cylinder_grid_positions_lengths_and_families():
    ch = sf.cylinder(1.0, 1.0)
    net = revolution_net(ch, 8, 5)
    assert net.check_invariants() == []
    # vertices on the unit circle at the requested heights
    assert np.allclose(np.hypot(net.position[:, 0], net.position[:, 1]), 1.0, atol=1e-14)
    par = net.family == 2  # circumferential edges carry the larger curvature 1
    assert np.allclose(net.length[par], 2 * math.pi / 8, rtol=1e-12)
    assert np.allclose(net.length[~par], 0.25, rtol=1e-12)
    interior = net.status == INTERIOR
    assert np.all(net.valence[interior] == 4)


def test_torus_grid_is_closed_in_both_directions():
    net = revolution_net(sf.torus(2.0, 0.5), 12, 6)
    assert net.check_invariants() == []
    assert np.all(net.status == INTERIOR)
    assert net.n_edges == 2 * 12 * 6


def test_arc_length_of_sphere_meridian_quarter():
    ch = sf.sphere(2.0, (-1.2, 1.2))
    L = arc_length(ch, np.array([[0.3, -1.0]]), np.array([[0.3, 1.0]]))
    assert L[0] == pytest.approx(4.0, rel=1e-13)  # R * dv


def test_plane_grid_is_accepted_and_monge_chart_is_not():
    net = revolution_net(sf.plane(1.0), 5, 5)
    assert net.check_invariants() == []
    with pytest.raises(UnsupportedChartError):
        revolution_net(sf.monge_patch({(2, 0): 0.5, (0, 2): 0.2}), 5, 5)


def test_net_text_roundtrip(tmp_path):
    ch = sf.torus()
    net = revolution_net(ch, 6, 4)
    write_net(net, tmp_path / "net.txt")
    back = read_net(tmp_path / "net.txt", ch)
    assert np.array_equal(back.uv, net.uv)
    assert np.array_equal(back.edges, net.edges)
    assert np.array_equal(back.family, net.family)
    write_net_obj(net, tmp_path / "net.obj")
    lines = (tmp_path / "net.obj").read_text().splitlines()
    assert sum(ln.startswith("v ") for ln in lines) == net.n_vertices
    assert sum(ln.startswith("l ") for ln in lines) == net.n_edges


# ---------------------------------------------------------------- tracing


def test_torus_meridian_closes_after_one_turn():
    ch = sf.torus(2.0, 0.5)
    c = trace_principal_line(ch, (0.4, 0.3), 2, 10.0, TraceConfig(step=0.02, sample_spacing=0.02), close=True)
    assert c.closed
    assert c.length == pytest.approx(2 * math.pi * 0.5, rel=1e-9)


def test_trace_follows_the_direction_field():
    ch = sf.triaxial_ellipsoid(2.0, 1.5, 1.0)
    c = trace_principal_line(ch, (0.7, 0.3), 1, 1.0, TraceConfig(step=0.02, sample_spacing=0.02))
    fr = sf.principal_frames(ch, c.uv)
    t = fr["Xu"] * c.a[:, :1] + fr["Xv"] * c.a[:, 1:]
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    assert np.max(1 - np.abs(np.einsum("ij,ij->i", t, fr["v1"]))) < 1e-10


def test_trace_is_step_size_independent():
    ch = sf.triaxial_ellipsoid(2.0, 1.5, 1.0)
    a = trace_principal_line(ch, (0.7, 0.3), 2, 0.8, TraceConfig(step=0.04, sample_spacing=0.04))
    b = trace_principal_line(ch, (0.7, 0.3), 2, 0.8, TraceConfig(step=0.02, sample_spacing=0.02))
    assert np.linalg.norm(a.uv[-1] - b.uv[-1]) < 1e-8


def test_trace_stops_near_umbilic():
    ch = umbilic_patch("star")
    cfg = TraceConfig(step=1e-3, sample_spacing=1e-3, umbilic_stop=1e-3)
    ends = [trace_principal_line(ch, (0.05, 0.0), 2, 0.2, cfg, direction=d) for d in (1.0, -1.0)]
    assert "umbilic" in {c.status_name for c in ends}
    stopped = next(c for c in ends if c.status_name == "umbilic")
    assert np.linalg.norm(ch.position(stopped.uv[-1:]) - ch.position(np.zeros((1, 2)))) < 1.5e-3


def test_trace_from_umbilic_is_ambiguous():
    with pytest.raises(UmbilicAmbiguityError):
        trace_principal_line(umbilic_patch("lemon"), (0.0, 0.0), 1, 0.1)


def test_trace_config_validation():
    with pytest.raises(ValueError):
        TraceConfig(step=0.0)


# ---------------------------------------------------------------- traced nets


def test_traced_net_reproduces_spheroid_grid():
    ch = sf.spheroid(1.3, 0.9, (-1.0, 1.0))
    n = 6
    seeds = np.column_stack([2 * math.pi * (np.arange(n) + 0.5) / n, np.linspace(-0.8, 0.8, n)])
    net = traced_net(ch, seeds, TraceConfig(step=0.01, sample_spacing=0.01))
    assert net.check_invariants() == []
    ref = revolution_net(ch, n, n, urange=(math.pi / n, 2 * math.pi + math.pi / n), vrange=(-0.8, 0.8))
    # the same meridian x parallel vertices, in some order
    P = np.sort(np.round(net.position, 9).view("f8,f8,f8"), axis=0)
    Q = np.sort(np.round(ref.position, 9).view("f8,f8,f8"), axis=0)
    assert len(P) == len(Q)
    assert np.array_equal(P, Q)


def test_traced_net_on_triaxial_ellipsoid_is_valid():
    ch = sf.triaxial_ellipsoid(2.0, 1.5, 1.0)
    region = (0.0, 2 * math.pi, -0.7, 0.7)
    net = traced_net(ch, seed_lattice(ch, 6, region), TraceConfig(step=0.01, sample_spacing=0.01),
                     spacing=0.4, region=region)
    assert net.check_invariants() == []
    interior = (net.status == INTERIOR) & ~net.umbilic
    assert interior.sum() > 20
    assert np.all(net.valence[interior] == 4)


# ---------------------------------------------------------------- umbilics


@pytest.mark.parametrize("pattern,index,n1,n2", [("lemon", 0.5, 1, 1), ("star", -0.5, 3, 3), ("monstar", 0.5, 3, 3)])
def test_umbilic_classification(pattern, index, n1, n2):
    info = classify_umbilic(umbilic_patch(pattern))
    assert info["pattern"] == pattern
    assert info["index"] == index
    assert (len(info["separatrices"][1]), len(info["separatrices"][2])) == (n1, n2)


def test_star_separatrices_are_at_multiples_of_sixty_degrees():
    sep = classify_umbilic(umbilic_patch("star"))["separatrices"]
    ang = np.sort(np.degrees(np.concatenate([sep[1], sep[2]])))
    assert np.allclose(ang, np.arange(0, 360, 60), atol=1e-3)


@pytest.mark.parametrize("pattern", ["lemon", "star", "monstar"])
def test_umbilic_net_invariants(pattern):
    net = umbilic_net(umbilic_patch(pattern), pattern, 4)
    assert net.check_invariants() == []
    assert net.umbilic[0]
    assert net.valence[0] >= 3
    assert net.meta["umbilic_valence"] == net.valence[0]


def test_lemon_umbilic_gets_filler_edges():
    net = umbilic_net(umbilic_patch("lemon"), "lemon", 4)
    assert net.meta["separatrices"] == 2
    assert net.meta["fillers"] == 2
    assert net.valence[0] == 4


def test_umbilic_net_rejects_wrong_pattern_and_too_few_rings():
    with pytest.raises(PatternValidationError):
        umbilic_net(umbilic_patch("star"), "lemon", 4)
    with pytest.raises(ValueError):
        umbilic_net(umbilic_patch("star"), "star", 1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 2 * math.pi, exclude_max=True), max_size=6), st.integers(1, 6))
def test_filler_directions_close_every_wide_gap(angles, sectors):
    fill = filler_directions(angles, sectors)
    rays = np.sort(np.mod(np.concatenate([angles, fill]), 2 * math.pi))
    distinct = rays[np.concatenate([[True], np.diff(rays) > 1e-12])]
    assert len(distinct) >= sectors
    gaps = np.diff(np.append(distinct, distinct[0] + 2 * math.pi))
    assert gaps.max() <= 2 * math.pi / 3 + 1e-9
    assert all(f not in angles for f in fill)
