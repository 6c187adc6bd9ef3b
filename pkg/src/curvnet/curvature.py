"""Discrete curvatures on vertex stars.

For an edge ``e`` of a star with counterclockwise neighbour ``f`` and
clockwise neighbour ``g`` this module computes

* the signed dihedral angle ``theta`` between the fan triangles ``(e, f)`` and
  ``(g, e)``, positive where the fan bends toward the normal;
* the integrated edge curvature in three variants,
  ``theta |e|`` (``angle``), ``2 sin(theta/2) |e|`` (``sin``) and
  ``2 tan(theta/2) |e|`` (``tan``), and ``H_e = k_e / 2``;
* the curvature vector ``J_f e + J_g e`` with
  ``J_f e = (|e|^2 f - (f.e) e) / |e x f|``;
* the circumcentric area ``A_e = (cot a + cot b) |e|^2 / 4`` split into the
  contributions ``A_ef`` and ``A_eg`` of the two triangles;

and, per vertex, the angle defect, the vertex area ``A_p = sum A_e / 2``, the
vertex mean curvature ``H_p = sum H_e / 2`` and the principal curvature
estimates ``k = k_e / (2 A_e)`` from area-maximizing edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AreaPositivityError, DegenerateTriangleError, NoSecondFaceError, VariantOverflowError
from .star import MIN_SIN, VertexStar

__all__ = ["VARIANTS", "EdgeCurvature", "VertexCurvature", "edge_curvatures", "dihedral_angle",
           "integrated_edge_curvature", "curvature_vector", "circumcentric_area",
           "circumcentric_area_unfolded", "triangle_subareas", "angle_defect",
           "vertex_area_and_mean", "select_area_maximizing", "principal_estimates",
           "vertex_curvatures", "hinge_quantities"]

VARIANTS = ("angle", "sin", "tan")
TAN_LIMIT = math.pi - 1e-6
TIE_RTOL = 1e-12


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def variant_value(theta, length, variant: str):
    """``k_e`` of one variant; the tan variant is NaN where ``|theta| >= pi - 1e-6``."""
    theta = np.asarray(theta, float)
    if variant == "angle":
        return theta * length
    if variant == "sin":
        return 2.0 * np.sin(0.5 * theta) * length
    if variant == "tan":
        with np.errstate(invalid="ignore"):
            return np.where(np.abs(theta) < TAN_LIMIT, 2.0 * np.tan(0.5 * theta) * length, np.nan)
    raise ValueError(f"unknown variant '{variant}' (expected one of {VARIANTS})")


def integrated_edge_curvature(theta: float, length: float, variant: str = "sin") -> float:
    """Integrated curvature ``k_e`` of an edge with dihedral angle ``theta``.

    Examples
    --------
    >>> [round(integrated_edge_curvature(math.pi / 2, 1.0, v), 5) for v in VARIANTS]
    [1.5708, 1.41421, 2.0]

    Raises
    ------
    VariantOverflowError
        For the tan variant with ``|theta| >= pi - 1e-6``.
    """
    if not abs(theta) < math.pi:
        raise ValueError("dihedral angle must lie in (-pi, pi)")
    if variant == "tan" and abs(theta) >= TAN_LIMIT:
        raise VariantOverflowError(f"tan variant undefined near theta = {theta!r}")
    return float(variant_value(theta, length, variant))


def hinge_quantities(e, f, g) -> dict:
    """All per-edge quantities of hinges ``(g, e, f)`` (arrays of shape ``(..., 3)``).

    ``f`` is the counterclockwise and ``g`` the clockwise neighbour of ``e``;
    both triangles must be nondegenerate.
    """
    ef = np.cross(e, f)
    ge = np.cross(g, e)
    nef = np.linalg.norm(ef, axis=-1)
    nge = np.linalg.norm(ge, axis=-1)
    le2 = _dot(e, e)
    le = np.sqrt(le2)
    n1 = ef / nef[..., None]
    n2 = ge / nge[..., None]
    theta = np.arctan2(_dot(np.cross(n2, n1), e) / le, _dot(n1, n2))
    fa = _dot(f, f - e)
    gb = _dot(g, g - e)
    cot_a = fa / nef
    cot_b = gb / nge
    Jf = (le2[..., None] * f - _dot(f, e)[..., None] * e) / nef[..., None]
    Jg = (le2[..., None] * g - _dot(g, e)[..., None] * e) / nge[..., None]
    Aef = 0.25 * cot_a * le2
    Aeg = 0.25 * cot_b * le2
    return dict(theta=theta, length=le, cot_a=cot_a, cot_b=cot_b, alpha=np.arctan2(nef, fa),
                beta=np.arctan2(nge, gb), Aef=Aef, Aeg=Aeg, A=Aef + Aeg, kvec=Jf + Jg)


@dataclass
class EdgeCurvature:
    """Per-edge discrete quantities of a star batch (arrays of shape ``(m, k)``).

    Attributes
    ----------
    theta : signed dihedral angle.
    length : chord length ``|e|``.
    kvec : (m, k, 3) curvature vector ``J_f e + J_g e``.
    alpha, beta : angles opposite ``e`` in the triangles ``(e, f)`` and ``(g, e)``.
    A, Aef, Aeg : circumcentric area and its split.
    sgn : sign of the circumcentric dual edge (``sign(cot a + cot b)``).
    gamma : tip angle at the center of the triangle ``(e, f)``.
    """

    eids: np.ndarray
    theta: np.ndarray
    length: np.ndarray
    kvec: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    A: np.ndarray
    Aef: np.ndarray
    Aeg: np.ndarray
    sgn: np.ndarray
    gamma: np.ndarray

    def k(self, variant: str = "sin") -> np.ndarray:
        """Integrated edge curvature ``k_e`` of the requested variant."""
        return variant_value(self.theta, self.length, variant)

    def H(self, variant: str = "sin") -> np.ndarray:
        return 0.5 * self.k(variant)


def edge_curvatures(star: VertexStar) -> EdgeCurvature:
    """Evaluate all per-edge quantities of a star batch in one pass."""
    E, F, G = star.E, star.F, star.G
    q = hinge_quantities(E, F, G)
    gamma = np.arctan2(np.linalg.norm(np.cross(E, F), axis=-1), _dot(E, F))
    return EdgeCurvature(
        eids=star.eids, theta=q["theta"], length=q["length"], kvec=q["kvec"], alpha=q["alpha"],
        beta=q["beta"], A=q["A"], Aef=q["Aef"], Aeg=q["Aeg"],
        sgn=np.sign(q["cot_a"] + q["cot_b"]).astype(np.int8), gamma=gamma,
    )


# ------------------------------------------------------------ single-edge API


def _hinge(star: VertexStar, i: int, s: int = 0):
    if star.k < 3:
        raise NoSecondFaceError("an edge of a star with fewer than three edges lacks a second face")
    if star.boundary[s]:
        raise NoSecondFaceError("boundary star: the outermost edges have only one face")
    E = star.E[s]
    e, f, g = E[i], E[(i + 1) % star.k], E[(i - 1) % star.k]
    for a in (f, g):
        sin = np.linalg.norm(np.cross(e, a)) / (np.linalg.norm(e) * np.linalg.norm(a))
        if not sin >= MIN_SIN:
            raise DegenerateTriangleError("degenerate fan triangle")
    return e, f, g


def dihedral_angle(star: VertexStar, i: int, s: int = 0) -> float:
    """Signed dihedral angle at edge ``i`` of star ``s`` in the batch.

    ``theta = atan2(((n2 x n1) . e_hat), n1 . n2)`` with ``n1 ~ e x f`` and
    ``n2 ~ g x e``; positive where the fan bends toward the normal.
    """
    e, f, g = _hinge(star, i, s)
    return float(hinge_quantities(e, f, g)["theta"])


def curvature_vector(star: VertexStar, i: int, s: int = 0) -> np.ndarray:
    """Curvature vector ``J_f e + J_g e`` of edge ``i``."""
    e, f, g = _hinge(star, i, s)
    return hinge_quantities(e, f, g)["kvec"]


def circumcentric_area(star: VertexStar, i: int, s: int = 0) -> dict:
    """Circumcentric area of edge ``i`` with its split, opposing angles and sign.

    Returns
    -------
    dict with keys ``A, Aef, Aeg, alpha, beta, sgn``.
    """
    e, f, g = _hinge(star, i, s)
    q = hinge_quantities(e, f, g)
    return dict(A=float(q["A"]), Aef=float(q["Aef"]), Aeg=float(q["Aeg"]), alpha=float(q["alpha"]),
                beta=float(q["beta"]), sgn=int(np.sign(q["cot_a"] + q["cot_b"])))


def circumcentric_area_unfolded(e, f, g) -> np.ndarray:
    """Circumcentric area from explicit circumcenters of the unfolded hinge.

    The two triangles are developed into a plane with ``e`` on the x-axis,
    ``(e, f)`` above and ``(g, e)`` below it.  The signed dual edge runs from
    the lower to the upper circumcenter, and ``A_e = |e| * dual / 2``.
    Independent of the cot formula; used as a cross-check.
    """
    e, f, g = (np.asarray(a, float) for a in (e, f, g))
    le = np.linalg.norm(e, axis=-1)
    eh = e / le[..., None]
    fx, fy = _dot(f, eh), np.linalg.norm(np.cross(eh, f), axis=-1)
    gx, gy = _dot(g, eh), -np.linalg.norm(np.cross(eh, g), axis=-1)

    def circum_y(x, y):
        # circumcenter of (0,0), (le,0), (x,y): its x is le/2
        return (x * x + y * y - le * x) / (2.0 * y)

    dual = circum_y(fx, fy) - circum_y(gx, gy)
    return 0.5 * le * dual


def triangle_subareas(e, f) -> np.ndarray:
    """Signed circumcentric sub-areas of the triangle ``(p, p+e, p+f)``.

    Returns the three contributions ``cot(opposite angle) |edge|^2 / 4`` of
    the edges ``e``, ``f`` and ``f - e``; they sum to the triangle area.
    """
    e, f = np.asarray(e, float), np.asarray(f, float)
    c = f - e
    area2 = np.linalg.norm(np.cross(e, f), axis=-1)
    cot_e = _dot(f, c) / area2          # angle at p+f, opposite e
    cot_f = _dot(-e, c) / area2         # angle at p+e, opposite f
    cot_c = _dot(e, f) / area2          # angle at p, opposite f-e
    return np.stack([0.25 * cot_e * _dot(e, e), 0.25 * cot_f * _dot(f, f), 0.25 * cot_c * _dot(c, c)], axis=-1)


# ------------------------------------------------------------ vertex quantities


def angle_defect(star: VertexStar) -> np.ndarray:
    """Angle defect ``2 pi - sum of tip angles`` of every star in the batch."""
    E, F = star.E, star.F
    gamma = np.arctan2(np.linalg.norm(np.cross(E, F), axis=-1), _dot(E, F))
    return 2.0 * math.pi - gamma.sum(axis=1)


def vertex_area_and_mean(star: VertexStar, variant: str = "sin", ec: EdgeCurvature | None = None):
    """Vertex area ``A_p = sum A_e / 2`` and mean curvature ``H_p = sum H_e / 2``.

    ``A_p`` may be negative.
    """
    ec = edge_curvatures(star) if ec is None else ec
    return 0.5 * ec.A.sum(axis=1), 0.5 * ec.H(variant).sum(axis=1)


def _argmax_ties(A, mask, eids):
    """Position of the largest ``A`` under ``mask``; near-ties go to the lowest edge id."""
    Am = np.where(mask, A, -np.inf)
    best = Am.max(axis=1)
    cand = mask & (Am >= best[:, None] - TIE_RTOL * np.abs(best[:, None]))
    key = np.where(cand, eids, np.iinfo(np.int64).max)
    pos = key.argmin(axis=1)
    pos = np.where(np.isfinite(best), pos, -1)
    return pos


def select_area_maximizing(star: VertexStar, ec: EdgeCurvature | None = None) -> np.ndarray:
    """Positions of the area-maximizing edges, shape ``(m, 2)``.

    Column 0 holds the family-1 edge and column 1 the family-2 edge.  At
    umbilics both columns hold the overall maximizer.  ``-1`` marks a family
    without edges.  Near-ties (relative ``1e-12``) are broken by lowest edge
    id.
    """
    ec = edge_curvatures(star) if ec is None else ec
    p1 = _argmax_ties(ec.A, star.family == 1, star.eids)
    p2 = _argmax_ties(ec.A, star.family == 2, star.eids)
    pa = _argmax_ties(ec.A, np.ones_like(star.family, bool), star.eids)
    umb = star.umbilic
    return np.stack([np.where(umb, pa, p1), np.where(umb, pa, p2)], axis=-1)


@dataclass
class VertexCurvature:
    """Vertex-level results of a star batch (arrays of shape ``(m,)``).

    Attributes
    ----------
    k1, k2 : principal curvature estimates (NaN where unavailable).
    chosen : (m, 2) net edge ids of the edges used for ``k2`` (family 1) and
        ``k1`` (family 2).
    chosen_pos : (m, 2) their positions within the star.
    A_p, H_p, K_p : vertex area, vertex mean curvature and angle defect.
    area_ok : chosen edges have positive circumcentric area.
    """

    vids: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    chosen: np.ndarray
    chosen_pos: np.ndarray
    A_p: np.ndarray
    H_p: np.ndarray
    K_p: np.ndarray
    area_ok: np.ndarray
    variant: str


def vertex_curvatures(star: VertexStar, variant: str = "sin", ec: EdgeCurvature | None = None) -> VertexCurvature:
    """Principal estimates and vertex quantities for a whole batch (no raising).

    The family-1 (``v1``-aligned) area-maximizing edge estimates ``k2`` and the
    family-2 edge estimates ``k1``.  Stars whose chosen edge has ``A_e <= 0``
    get NaN estimates and ``area_ok = False``.
    """
    ec = edge_curvatures(star) if ec is None else ec
    pos = select_area_maximizing(star, ec)
    rows = np.arange(star.m)
    ke = ec.k(variant)
    A_sel = np.where(pos >= 0, ec.A[rows[:, None], np.maximum(pos, 0)], np.nan)
    k_sel = np.where(pos >= 0, ke[rows[:, None], np.maximum(pos, 0)], np.nan)
    ok = np.all(A_sel > 0, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        est = np.where(A_sel > 0, k_sel / (2.0 * A_sel), np.nan)
    chosen = np.where(pos >= 0, star.eids[rows[:, None], np.maximum(pos, 0)], -1)
    A_p, H_p = vertex_area_and_mean(star, variant, ec)
    K_p = 2.0 * math.pi - ec.gamma.sum(axis=1)
    return VertexCurvature(vids=star.vids, k1=est[:, 1], k2=est[:, 0], chosen=chosen, chosen_pos=pos,
                           A_p=A_p, H_p=H_p, K_p=K_p, area_ok=ok, variant=variant)


def principal_estimates(star: VertexStar, variant: str = "sin") -> tuple[float, float]:
    """Principal curvature estimates ``(k1, k2)`` of a single star.

    Raises
    ------
    AreaPositivityError
        If a chosen area-maximizing edge has ``A_e <= 0``.
    """
    vc = vertex_curvatures(star, variant)
    if not vc.area_ok[0]:
        raise AreaPositivityError("area-maximizing edge with non-positive circumcentric area")
    return float(vc.k1[0]), float(vc.k2[0])
