"""Shared fixtures: analytic oracle stars and random hinges."""

import math

import numpy as np
import pytest

from curvnet.star import star_from_vectors


def cylinder_star(dtheta: float = 0.2, h: float = 0.1):
    """Star at (1, 0, 0) on the unit cylinder with axial edges +-h and chords to +-dtheta.

    The normal points to the axis.  Axial edges are family 1 (the zero
    curvature direction), chords family 2.  Their hinges are exact: the axial
    dihedral angle is ``dtheta`` with circumcentric area ``h sin(dtheta/2)``;
    the chord hinge is flat.
    """
    c, s = math.cos(dtheta) - 1.0, math.sin(dtheta)
    up, chord_p, down, chord_m = (0, 0, h), (c, s, 0), (0, 0, -h), (c, -s, 0)
    n = (-1.0, 0.0, 0.0)
    for E in ([up, chord_p, down, chord_m], [up, chord_m, down, chord_p]):
        fam = [1 if e[2] != 0 else 2 for e in E]
        star = star_from_vectors(E, n, family=fam, v1=(0, 0, 1), k1=0.0, k2=1.0)
        if star.valid[0]:
            return star
    raise AssertionError("no counterclockwise ordering found")  # pragma: no cover


def random_hinges(rng, n: int, min_sin: float = 0.05):
    """``n`` random nondegenerate hinges ``(e, f, g)`` with well-separated fan pairs."""
    out = []
    while sum(len(a) for a in out) < n:
        e, f, g = (rng.normal(size=(2 * n, 3)) for _ in range(3))
        def sin(a, b):
            return np.linalg.norm(np.cross(a, b), axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        keep = (sin(e, f) > min_sin) & (sin(g, e) > min_sin)
        out.append(np.stack([e[keep], f[keep], g[keep]], axis=1))
    H = np.concatenate(out)[:n]
    return H[:, 0], H[:, 1], H[:, 2]


@pytest.fixture
def cyl_star():
    return cylinder_star()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
