"""Analytic surface charts with exact differential geometry.

A chart maps a parameter rectangle into E^3.  Every chart supplies the
partial derivatives of its position map up to third order in closed form, so
fundamental forms, shape operator, principal curvatures and directions,
geodesic curvatures of principal lines and derivatives of the principal
curvatures are all evaluated without numerical differentiation.

Sign conventions
----------------
The unit normal is ``n = orientation * (X_u x X_v) / |X_u x X_v|`` and the
second fundamental form is ``II(a, b) = X_ab . n``.  A normal curvature is
positive where the surface bends *toward* ``n``, so that near a point the
surface is the graph ``h = (k1/2) x^2 + (k2/2) y^2 + O(3)`` over its tangent
plane in Darboux coordinates.  Built-in closed and convex charts (spheres,
ellipsoids, tori, cylinders) use the inward normal, which makes their
curvatures positive; Monge patches use the upward normal.

Principal curvatures are ordered ``k1 <= k2``.  The Darboux frame is
``(v1, v2, n)`` with ``n = v1 x v2``.  At umbilics ``v1`` falls back to the
normalized ``X_u`` direction.

All evaluation routines are vectorized over arbitrary batches of parameter
points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, ImmersionError, UmbilicAmbiguityError

__all__ = [
    "Profile",
    "SurfaceChart",
    "RevolutionChart",
    "TriaxialEllipsoidChart",
    "MongeChart",
    "TransformedChart",
    "SurfacePointData",
    "SurfaceBounds",
    "sphere",
    "plane",
    "cylinder",
    "torus",
    "spheroid",
    "triaxial_ellipsoid",
    "monge_patch",
    "eval_point",
    "eval_points",
    "shape_operator",
    "principal_frames",
    "osculating_height",
    "estimate_bounds",
    "principal_direction_field",
    "chart_from_config",
]

TWO_PI = 2.0 * math.pi
UMBILIC_REL_TOL = 1e-8
SAFETY = 1.05

def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _unit(a):
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def _trig(fn: str, x, order: int):
    """``order``-th derivative of ``cos`` or ``sin`` evaluated at ``x``."""
    shift = order * 0.5 * math.pi
    return np.cos(x + shift) if fn == "cos" else np.sin(x + shift)


# --------------------------------------------------------------------------
# Charts
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """Smooth scalar function of one variable with exact derivatives.

    ``f(v) = sum_i poly[i] v**i + sum_(k, a) a cos(k v) + sum_(k, b) b sin(k v)``

    Parameters
    ----------
    poly : tuple of float
        Polynomial coefficients in increasing degree.
    cos, sin : tuple of (float, float)
        ``(frequency, amplitude)`` pairs of the trigonometric terms.
    """

    poly: tuple[float, ...] = ()
    cos: tuple[tuple[float, float], ...] = ()
    sin: tuple[tuple[float, float], ...] = ()

    def __call__(self, v, order: int = 0) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        for i, c in enumerate(self.poly):
            if i < order or c == 0.0:
                continue
            fall = math.perm(i, order)
            out = out + c * fall * v ** (i - order)
        for k, a in self.cos:
            out = out + a * k**order * _trig("cos", k * v, order)
        for k, b in self.sin:
            out = out + b * k**order * _trig("sin", k * v, order)
        return out


@dataclass(frozen=True)
class SurfaceChart:
    """Base class of analytic charts.

    Subclasses implement :meth:`partials`.  ``domain`` is the parameter
    rectangle ``(u0, u1, v0, v1)``; an axis flagged in ``periodic`` wraps with
    period equal to its width.
    """

    kind: str = field(init=False, default="abstract")
    domain: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    periodic: tuple[bool, bool] = (False, False)
    orientation: int = 1

    def partials(self, u, v, order: int = 3) -> dict:
        """Return ``{(i, j): d^{i+j} X / du^i dv^j}`` for ``i + j <= order``."""
        raise NotImplementedError

    def position(self, uv) -> np.ndarray:
        uv = np.asarray(uv, dtype=float)
        return self.partials(uv[..., 0], uv[..., 1], order=0)[0, 0]

    def umbilic_points(self) -> np.ndarray:
        """Parameter points of the isolated umbilics known in closed form."""
        return np.zeros((0, 2))

    @property
    def totally_umbilic(self) -> bool:
        return False

    @cached_property
    def curvature_scale(self) -> float:
        """Largest |k| on a coarse grid (no safety factor); sets tolerances."""
        uv = _grid(self, 33)
        g = _core(self, uv[..., 0], uv[..., 1], order=2, umbilic_tol=0.0)
        return float(np.max(np.maximum(np.abs(g["k1"]), np.abs(g["k2"]))))

    @property
    def umbilic_tol(self) -> float:
        return max(UMBILIC_REL_TOL * self.curvature_scale, 1e-300)

    def wrap(self, uv) -> np.ndarray:
        """Reduce periodic coordinates into the domain."""
        uv = np.array(uv, dtype=float, copy=True)
        for axis in (0, 1):
            if self.periodic[axis]:
                lo, hi = self.domain[2 * axis], self.domain[2 * axis + 1]
                uv[..., axis] = lo + np.mod(uv[..., axis] - lo, hi - lo)
        return uv

    def in_domain(self, uv, slack: float = 0.0) -> np.ndarray:
        uv = np.asarray(uv, dtype=float)
        ok = np.ones(uv.shape[:-1], dtype=bool)
        for axis in (0, 1):
            if not self.periodic[axis]:
                lo, hi = self.domain[2 * axis], self.domain[2 * axis + 1]
                ok &= (uv[..., axis] >= lo - slack) & (uv[..., axis] <= hi + slack)
        return ok


@dataclass(frozen=True)
class RevolutionChart(SurfaceChart):
    """Surface of revolution ``X = (r(v) cos u, r(v) sin u, z(v))``.

    The inward normal is used (``orientation = -1``) for profiles with
    ``z' > 0``, which makes spheres, tori and spheroids positively curved.
    """

    radius: Profile = Profile(poly=(1.0,))
    height: Profile = Profile(poly=(0.0, 1.0))
    name: str = "surface-of-revolution"
    orientation: int = -1

    def __post_init__(self):
        object.__setattr__(self, "kind", self.name)

    def partials(self, u, v, order: int = 3) -> dict:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        u, v = np.broadcast_arrays(u, v)
        rj = [self.radius(v, j) for j in range(order + 1)]
        zj = [self.height(v, j) for j in range(order + 1)]
        out = {}
        for tot in range(order + 1):
            for i in range(tot, -1, -1):
                j = tot - i
                x = rj[j] * _trig("cos", u, i)
                y = rj[j] * _trig("sin", u, i)
                z = zj[j] if i == 0 else np.zeros_like(u)
                out[i, j] = np.stack([x, y, z], axis=-1)
        return out

    @property
    def totally_umbilic(self) -> bool:
        return self.name == "sphere"


@dataclass(frozen=True)
class TriaxialEllipsoidChart(SurfaceChart):
    """Ellipsoid ``X = (a sin v, b cos v cos u, c cos v sin u)``.

    The coordinate singularities sit at ``(+-a, 0, 0)``; the four umbilics of
    an ellipsoid with ``a > b > c`` (in the ``xz`` plane) are regular points
    of the chart.
    """

    a: float = 2.0
    b: float = 1.5
    c: float = 1.0
    orientation: int = -1

    def __post_init__(self):
        object.__setattr__(self, "kind", "triaxial-ellipsoid")

    def partials(self, u, v, order: int = 3) -> dict:
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        out = {}
        for tot in range(order + 1):
            for i in range(tot, -1, -1):
                j = tot - i
                x = self.a * _trig("sin", v, j) if i == 0 else np.zeros_like(u)
                y = self.b * _trig("cos", v, j) * _trig("cos", u, i)
                z = self.c * _trig("cos", v, j) * _trig("sin", u, i)
                out[i, j] = np.stack([x, y, z], axis=-1)
        return out

    def umbilic_points(self) -> np.ndarray:
        a, b, c = self.a, self.b, self.c
        if not (a > b > c > 0):
            return np.zeros((0, 2))
        sx = math.sqrt((a * a - b * b) / (a * a - c * c))
        sz = math.sqrt((b * b - c * c) / (a * a - c * c))
        pts = []
        for xs in (1.0, -1.0):
            for zs in (1.0, -1.0):
                v = math.asin(xs * sx)
                # cos v = sz there, so z = c cos v sin u = +-c sz needs cos u = 0
                u = 0.5 * math.pi if zs > 0 else 1.5 * math.pi
                pts.append((u, v))
        return np.array(pts)


@dataclass(frozen=True)
class MongeChart(SurfaceChart):
    """Height-function patch ``X = (x, y, h(x, y))`` with polynomial ``h``.

    ``coeffs`` maps exponent pairs ``(p, q)`` to the coefficient of
    ``x**p y**q``.  The upward normal is used.
    """

    coeffs: tuple[tuple[tuple[int, int], float], ...] = ()
    name: str = "monge-patch"
    umbilics: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", self.name)

    def _h(self, x, y, i, j):
        out = np.zeros_like(x)
        for (p, q), c in self.coeffs:
            if p < i or q < j or c == 0.0:
                continue
            out = out + c * math.perm(p, i) * math.perm(q, j) * x ** (p - i) * y ** (q - j)
        return out

    def partials(self, u, v, order: int = 3) -> dict:
        x, y = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        zero = np.zeros_like(x)
        one = np.ones_like(x)
        out = {(0, 0): np.stack([x, y, self._h(x, y, 0, 0)], axis=-1)}
        if order >= 1:
            out[1, 0] = np.stack([one, zero, self._h(x, y, 1, 0)], axis=-1)
            out[0, 1] = np.stack([zero, one, self._h(x, y, 0, 1)], axis=-1)
        for tot in range(2, order + 1):
            for i in range(tot, -1, -1):
                j = tot - i
                out[i, j] = np.stack([zero, zero, self._h(x, y, i, j)], axis=-1)
        return out

    def coefficient(self, p: int, q: int) -> float:
        return float(sum(c for (pp, qq), c in self.coeffs if (pp, qq) == (p, q)))

    def umbilic_points(self) -> np.ndarray:
        return np.array(self.umbilics, dtype=float).reshape(-1, 2)

    @property
    def totally_umbilic(self) -> bool:
        return self.name == "plane"


@dataclass(frozen=True)
class TransformedChart(SurfaceChart):
    """``X' = scale * R X + t`` for a base chart, rotation ``R`` and scale > 0."""

    base: SurfaceChart = None
    rotation: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    translation: tuple = (0.0, 0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self):
        b = self.base
        object.__setattr__(self, "kind", b.kind)
        object.__setattr__(self, "domain", b.domain)
        object.__setattr__(self, "periodic", b.periodic)
        det = float(np.linalg.det(np.asarray(self.rotation, float)))
        object.__setattr__(self, "orientation", b.orientation * (1 if det > 0 else -1))

    def partials(self, u, v, order: int = 3) -> dict:
        R = np.asarray(self.rotation, float)
        out = {}
        for key, val in self.base.partials(u, v, order).items():
            w = self.scale * (val @ R.T)
            if key == (0, 0):
                w = w + np.asarray(self.translation, float)
            out[key] = w
        return out

    def umbilic_points(self) -> np.ndarray:
        return self.base.umbilic_points()

    @property
    def totally_umbilic(self) -> bool:
        return self.base.totally_umbilic


# --------------------------------------------------------------------------
# Factories
# --------------------------------------------------------------------------


def sphere(R: float = 1.0, lat: tuple[float, float] = (-math.pi / 3, math.pi / 3)) -> RevolutionChart:
    """Sphere of radius ``R``; ``v`` is latitude restricted to ``lat``."""
    return RevolutionChart(
        domain=(0.0, TWO_PI, float(lat[0]), float(lat[1])),
        periodic=(True, False),
        radius=Profile(cos=((1.0, R),)),
        height=Profile(sin=((1.0, R),)),
        name="sphere",
    )


def cylinder(r: float = 1.0, height: float = 1.0) -> RevolutionChart:
    """Circular cylinder of radius ``r`` around the z axis, ``0 <= z <= height``."""
    return RevolutionChart(
        domain=(0.0, TWO_PI, 0.0, float(height)),
        periodic=(True, False),
        radius=Profile(poly=(float(r),)),
        height=Profile(poly=(0.0, 1.0)),
        name="cylinder",
    )


def torus(R: float = 2.0, r: float = 0.5) -> RevolutionChart:
    """Torus with center-line radius ``R`` and tube radius ``r``; ``v`` is the tube angle."""
    return RevolutionChart(
        domain=(0.0, TWO_PI, 0.0, TWO_PI),
        periodic=(True, True),
        radius=Profile(poly=(float(R),), cos=((1.0, float(r)),)),
        height=Profile(sin=((1.0, float(r)),)),
    )


def spheroid(a: float = 1.3, c: float = 0.9, lat: tuple[float, float] = (-1.0, 1.0)) -> RevolutionChart:
    """Ellipsoid of revolution with semi-axes ``(a, a, c)``; ``v`` is the reduced latitude."""
    return RevolutionChart(
        domain=(0.0, TWO_PI, float(lat[0]), float(lat[1])),
        periodic=(True, False),
        radius=Profile(cos=((1.0, float(a)),)),
        height=Profile(sin=((1.0, float(c)),)),
    )


def triaxial_ellipsoid(a: float = 2.0, b: float = 1.5, c: float = 1.0,
                       vrange: tuple[float, float] = (-1.2, 1.2)) -> TriaxialEllipsoidChart:
    """Triaxial ellipsoid with semi-axes ``a, b, c`` (see :class:`TriaxialEllipsoidChart`)."""
    return TriaxialEllipsoidChart(
        domain=(0.0, TWO_PI, float(vrange[0]), float(vrange[1])),
        periodic=(True, False),
        a=float(a), b=float(b), c=float(c),
    )


def plane(half_width: float = 1.0) -> MongeChart:
    """The plane ``z = 0`` over ``[-w, w]^2``."""
    w = float(half_width)
    return MongeChart(domain=(-w, w, -w, w), name="plane")


def monge_patch(coeffs: Mapping[tuple[int, int], float], half_width: float = 1.0,
                umbilics: Sequence[tuple[float, float]] = ()) -> MongeChart:
    """Monge patch ``z = sum c_pq x^p y^q`` over ``[-w, w]^2``.

    Parameters
    ----------
    coeffs : mapping
        ``{(p, q): c}``; any degree is accepted.
    umbilics : sequence of (x, y)
        Known isolated umbilics (used as stop points when tracing).
    """
    w = float(half_width)
    items = tuple(sorted((tuple(map(int, k)), float(v)) for k, v in coeffs.items() if v != 0.0))
    return MongeChart(domain=(-w, w, -w, w), coeffs=items,
                      umbilics=tuple(tuple(map(float, p)) for p in umbilics))


# --------------------------------------------------------------------------
# Pointwise geometry
# --------------------------------------------------------------------------


@dataclass
class SurfacePointData:
    """Differential geometry at one parameter point (or a batch of them).

    All fields carry a leading batch shape when produced by
    :func:`eval_points`.  Geodesic curvatures and curvature derivatives are
    NaN at umbilics.

    Attributes
    ----------
    uv, position : ndarray
        Parameter point and its image.
    v1, v2, n : ndarray
        Darboux frame, ``n = v1 x v2``.
    k1, k2 : ndarray
        Principal curvatures, ``k1 <= k2``.
    dk : ndarray
        ``k2 - k1``.
    umbilic : ndarray of bool
    kg1, kg2 : ndarray
        Geodesic curvatures of the principal lines along ``v1`` and ``v2``
        (sign taken w.r.t. ``n x v_i``).
    dk1_v1, dk1_v2, dk2_v1, dk2_v2 : ndarray
        Directional derivatives of the principal curvatures.
    """

    uv: np.ndarray
    position: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    n: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    dk: np.ndarray
    umbilic: np.ndarray
    kg1: np.ndarray
    kg2: np.ndarray
    dk1_v1: np.ndarray
    dk1_v2: np.ndarray
    dk2_v1: np.ndarray
    dk2_v2: np.ndarray

    def __getitem__(self, idx) -> "SurfacePointData":
        return SurfacePointData(**{k: getattr(self, k)[idx] for k in self.__dataclass_fields__})

    def __len__(self) -> int:
        return len(self.k1)


def _core(chart: SurfaceChart, u, v, order: int = 3, umbilic_tol: float | None = None) -> dict:
    """Vectorized fundamental forms, principal frame and (optionally) derivatives."""
    P = chart.partials(u, v, order=max(order, 2))
    Xu, Xv = P[1, 0], P[0, 1]
    E, F, G = _dot(Xu, Xu), _dot(Xu, Xv), _dot(Xv, Xv)
    cr = np.cross(Xu, Xv)
    area = np.linalg.norm(cr, axis=-1)
    det = E * G - F * F
    bad = ~(area > 1e-14 * np.maximum(E, G))
    if np.any(bad):
        raise ImmersionError(f"degenerate metric at {int(np.count_nonzero(bad))} parameter point(s)")
    n = chart.orientation * cr / area[..., None]
    L, M, N = _dot(P[2, 0], n), _dot(P[1, 1], n), _dot(P[0, 2], n)

    def coords(t):
        bu, bv = _dot(Xu, t), _dot(Xv, t)
        return (G * bu - F * bv) / det, (E * bv - F * bu) / det

    def II(a, b):
        return L * a[0] * b[0] + M * (a[0] * b[1] + a[1] * b[0]) + N * a[1] * b[1]

    t1 = Xu / np.sqrt(E)[..., None]
    t2 = np.cross(n, t1)
    c1 = (1.0 / np.sqrt(E), np.zeros_like(E))
    c2 = coords(t2)
    s11, s12, s22 = II(c1, c1), II(c1, c2), II(c2, c2)
    mean = 0.5 * (s11 + s22)
    dif = 0.5 * (s11 - s22)
    rad = np.hypot(dif, s12)
    k1, k2 = mean - rad, mean + rad
    tol = chart.umbilic_tol if umbilic_tol is None else umbilic_tol
    umb = (2.0 * rad) < tol
    # the k2 eigenvector of [[s11, s12], [s12, s22]] sits at angle psi from t1
    psi = 0.5 * np.arctan2(s12, dif)
    psi = np.where(umb, -0.5 * math.pi, psi)
    cp, sp = np.cos(psi)[..., None], np.sin(psi)[..., None]
    v1 = -sp * t1 + cp * t2
    v2 = np.cross(n, v1)
    out = dict(P=P, E=E, F=F, G=G, det=det, n=n, L=L, M=M, N=N, k1=k1, k2=k2,
               umbilic=umb, v1=v1, v2=v2, t1=t1, t2=t2, s11=s11, s12=s12, s22=s22)
    if order < 3:
        return out

    a1 = np.stack(coords(v1), axis=-1)
    a2 = np.stack(coords(v2), axis=-1)
    Winv = np.stack([np.stack([G, -F], -1), np.stack([-F, E], -1)], -2) / det[..., None, None]
    II_m = np.stack([np.stack([L, M], -1), np.stack([M, N], -1)], -2)
    W = Winv @ II_m  # Weingarten matrix I^{-1} II

    def derivs(w):
        """dI[w], dII[w] (2x2) and d(J)[w] columns for parameter direction w."""
        wu, wv = w[..., 0:1], w[..., 1:2]
        Xu_w = P[2, 0] * wu + P[1, 1] * wv
        Xv_w = P[1, 1] * wu + P[0, 2] * wv
        dE = 2 * _dot(Xu, Xu_w)
        dF = _dot(Xu_w, Xv) + _dot(Xu, Xv_w)
        dG = 2 * _dot(Xv, Xv_w)
        Ww = np.einsum("...ij,...j->...i", W, w)
        dn = -(Xu * Ww[..., 0:1] + Xv * Ww[..., 1:2])
        Xuu_w = P[3, 0] * wu + P[2, 1] * wv
        Xuv_w = P[2, 1] * wu + P[1, 2] * wv
        Xvv_w = P[1, 2] * wu + P[0, 3] * wv
        dL = _dot(Xuu_w, n) + _dot(P[2, 0], dn)
        dM = _dot(Xuv_w, n) + _dot(P[1, 1], dn)
        dN = _dot(Xvv_w, n) + _dot(P[0, 2], dn)
        dI = np.stack([np.stack([dE, dF], -1), np.stack([dF, dG], -1)], -2)
        dII = np.stack([np.stack([dL, dM], -1), np.stack([dM, dN], -1)], -2)
        return dI, dII, Xu_w, Xv_w

    def quad(A, x, y):
        return np.einsum("...i,...ij,...j->...", x, A, y)

    dI1, dII1, Xu_1, Xv_1 = derivs(a1)
    dI2, dII2, Xu_2, Xv_2 = derivs(a2)
    dk1_v1 = quad(dII1 - k1[..., None, None] * dI1, a1, a1)
    dk2_v1 = quad(dII1 - k2[..., None, None] * dI1, a2, a2)
    dk1_v2 = quad(dII2 - k1[..., None, None] * dI2, a1, a1)
    dk2_v2 = quad(dII2 - k2[..., None, None] * dI2, a2, a2)
    with np.errstate(divide="ignore", invalid="ignore"):
        c12 = quad(dII1 - k1[..., None, None] * dI1, a2, a1) / (k1 - k2)
        c21 = quad(dII2 - k2[..., None, None] * dI2, a1, a2) / (k2 - k1)
    # derivative of the ambient vector J a along J w, second-derivative part
    dJa1_a1 = Xu_1 * a1[..., 0:1] + Xv_1 * a1[..., 1:2]
    dJa2_a2 = Xu_2 * a2[..., 0:1] + Xv_2 * a2[..., 1:2]
    kg1 = _dot(dJa1_a1, v2) + c12
    kg2 = -(_dot(dJa2_a2, v1) + c21)
    nan = np.where(umb, np.nan, 1.0)
    out.update(kg1=kg1 * nan, kg2=kg2 * nan, dk1_v1=dk1_v1 * nan, dk1_v2=dk1_v2 * nan,
               dk2_v1=dk2_v1 * nan, dk2_v2=dk2_v2 * nan, a1=a1, a2=a2, W=W)
    return out


def eval_points(chart: SurfaceChart, uv) -> SurfacePointData:
    """Evaluate :class:`SurfacePointData` on a batch of parameter points.

    Parameters
    ----------
    chart : SurfaceChart
    uv : array_like, shape (..., 2)

    Raises
    ------
    ImmersionError
        If the metric is degenerate at any of the points.
    """
    uv = np.asarray(uv, dtype=float)
    g = _core(chart, uv[..., 0], uv[..., 1], order=3)
    return SurfacePointData(
        uv=uv.copy(), position=g["P"][0, 0], v1=g["v1"], v2=g["v2"], n=g["n"],
        k1=g["k1"], k2=g["k2"], dk=g["k2"] - g["k1"], umbilic=g["umbilic"],
        kg1=g["kg1"], kg2=g["kg2"], dk1_v1=g["dk1_v1"], dk1_v2=g["dk1_v2"],
        dk2_v1=g["dk2_v1"], dk2_v2=g["dk2_v2"],
    )


def eval_point(chart: SurfaceChart, uv) -> SurfacePointData:
    """Evaluate the differential geometry of ``chart`` at a single point ``uv``.

    Examples
    --------
    >>> p = eval_point(sphere(2.0), (0.3, 0.2))
    >>> round(float(p.k1), 12), round(float(p.k2), 12), bool(p.umbilic)
    (0.5, 0.5, True)
    """
    uv = np.asarray(uv, dtype=float).reshape(1, 2)
    return eval_points(chart, uv)[0]


def principal_frames(chart: SurfaceChart, uv) -> dict:
    """Cheap batch evaluation of position, frame and curvatures (no 3rd order).

    Returns a dict with keys ``X, n, v1, v2, k1, k2, umbilic, Xu, Xv, E, F, G``.
    """
    uv = np.asarray(uv, dtype=float)
    g = _core(chart, uv[..., 0], uv[..., 1], order=2)
    P = g["P"]
    return dict(X=P[0, 0], Xu=P[1, 0], Xv=P[0, 1], n=g["n"], v1=g["v1"], v2=g["v2"],
                k1=g["k1"], k2=g["k2"], umbilic=g["umbilic"], E=g["E"], F=g["F"], G=g["G"],
                det=g["det"])


def tangent_to_param(frames: Mapping, t) -> np.ndarray:
    """Parameter-space coordinates ``a`` with ``J a = t`` for tangent vectors ``t``."""
    Xu, Xv, E, F, G, det = (frames[k] for k in ("Xu", "Xv", "E", "F", "G", "det"))
    bu, bv = _dot(Xu, t), _dot(Xv, t)
    return np.stack([(G * bu - F * bv) / det, (E * bv - F * bu) / det], axis=-1)


def shape_operator(chart: SurfaceChart, uv) -> np.ndarray:
    """Ambient 3x3 matrix of the shape operator ``S = -dn`` (zero on ``n``)."""
    uv = np.asarray(uv, dtype=float)
    g = _core(chart, uv[..., 0], uv[..., 1], order=2, umbilic_tol=0.0)
    P = g["P"]
    J = np.stack([P[1, 0], P[0, 1]], axis=-1)  # (..., 3, 2)
    E, F, G, det = g["E"], g["F"], g["G"], g["det"]
    Iinv = np.stack([np.stack([G, -F], -1), np.stack([-F, E], -1)], -2) / det[..., None, None]
    II = np.stack([np.stack([g["L"], g["M"]], -1), np.stack([g["M"], g["N"]], -1)], -2)
    return J @ Iinv @ II @ Iinv @ np.swapaxes(J, -1, -2)


def osculating_height(point: SurfacePointData, x, y):
    """Height ``P(x, y) = (k1/2) x^2 + (k2/2) y^2`` of the osculating paraboloid.

    Examples
    --------
    >>> p = eval_point(sphere(2.0), (0.0, 0.0))
    >>> round(float(osculating_height(p, 0.1, 0.0)), 12)
    0.0025
    """
    return 0.5 * point.k1 * np.asarray(x) ** 2 + 0.5 * point.k2 * np.asarray(y) ** 2


def principal_direction_field(chart: SurfaceChart, uv, family: int, previous=None) -> np.ndarray:
    """Unit principal direction of ``family`` (1 or 2) at ``uv``.

    The line field is turned into a vector by requiring a non-negative dot
    product with ``previous``.  Without ``previous`` the frame's own sign rule
    is used (``v1`` is the ``k1``-eigenvector making an angle in ``(0, pi]``
    with ``X_u``, measured counterclockwise about ``n``; ``v2 = n x v1``).

    Raises
    ------
    UmbilicAmbiguityError
        At an umbilic when ``previous`` is not given.
    """
    if family not in (1, 2):
        raise ValueError("family must be 1 or 2")
    fr = principal_frames(chart, np.asarray(uv, float).reshape(1, 2))
    if fr["umbilic"][0]:
        if previous is None:
            raise UmbilicAmbiguityError(f"umbilic at {tuple(np.ravel(uv))}: direction undefined")
        n = fr["n"][0]
        p = np.asarray(previous, float)
        t = p - np.dot(p, n) * n
        return t / np.linalg.norm(t)
    d = fr["v1" if family == 1 else "v2"][0]
    if previous is not None and np.dot(d, previous) < 0:
        d = -d
    return d


# --------------------------------------------------------------------------
# Global bounds
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceBounds:
    """Global curvature bounds ``K >= |S|`` and ``K' >= |nabla S|`` (safety 1.05)."""

    K: float
    Kp: float
    density: int


def _grid(chart: SurfaceChart, density: int) -> np.ndarray:
    u0, u1, v0, v1 = chart.domain
    us = np.linspace(u0, u1, density, endpoint=not chart.periodic[0])
    vs = np.linspace(v0, v1, density, endpoint=not chart.periodic[1])
    U, V = np.meshgrid(us, vs, indexing="ij")
    return np.stack([U.ravel(), V.ravel()], axis=-1)


def _frame_matrix(g: dict, t1):
    """Shape operator components in the frame ``(t1, n x t1)``; t1 tangent unit."""
    n = g["n"]
    t2 = np.cross(n, t1)
    P = g["P"]
    Xu, Xv, E, F, G, det = P[1, 0], P[0, 1], g["E"], g["F"], g["G"], g["det"]

    def coords(t):
        bu, bv = _dot(Xu, t), _dot(Xv, t)
        return (G * bu - F * bv) / det, (E * bv - F * bu) / det

    L, M, N = g["L"], g["M"], g["N"]

    def II(a, b):
        return L * a[0] * b[0] + M * (a[0] * b[1] + a[1] * b[0]) + N * a[1] * b[1]

    c1, c2 = coords(t1), coords(t2)
    return II(c1, c1), II(c1, c2), II(c2, c2)


def estimate_bounds(chart: SurfaceChart, density: int = 64, n_dirs: int = 8) -> SurfaceBounds:
    """Estimate ``K`` and ``K'`` on a ``density x density`` parameter grid.

    ``K`` is the maximal spectral norm of the shape operator.  ``K'`` is the
    maximal operator norm of ``nabla_w S`` over the grid and ``n_dirs`` unit
    tangent directions ``w``, using central differences of ``S`` written in
    frames carried to the neighbouring points by tangential projection.  The
    step is ``1e-4 / K0`` (``K0`` the grid maximum of ``|k|``), which makes the
    estimate scale covariant.  Both results carry a safety factor of 1.05.
    """
    if density < 32:
        raise ValueError("grid density must be at least 32 per axis")
    uv = _grid(chart, density)
    g = _core(chart, uv[:, 0], uv[:, 1], order=2, umbilic_tol=0.0)
    K0 = float(np.max(np.maximum(np.abs(g["k1"]), np.abs(g["k2"]))))
    h = 1e-4 / K0 if K0 > 0 else 1e-4 * _extent(chart)
    t1, t2 = g["t1"], g["t2"]
    best = 0.0
    for psi in np.arange(n_dirs) * (math.pi / n_dirs):
        w = math.cos(psi) * t1 + math.sin(psi) * t2
        fr = dict(Xu=g["P"][1, 0], Xv=g["P"][0, 1], E=g["E"], F=g["F"], G=g["G"], det=g["det"])
        a = tangent_to_param(fr, w)
        mats = []
        for sgn in (1.0, -1.0):
            q = uv + sgn * h * a
            gq = _core(chart, q[:, 0], q[:, 1], order=2, umbilic_tol=0.0)
            tt = t1 - _dot(t1, gq["n"])[:, None] * gq["n"]
            tt = _unit(tt)
            mats.append(_frame_matrix(gq, tt))
        d11 = (mats[0][0] - mats[1][0]) / (2 * h)
        d12 = (mats[0][1] - mats[1][1]) / (2 * h)
        d22 = (mats[0][2] - mats[1][2]) / (2 * h)
        op = np.abs(0.5 * (d11 + d22)) + np.hypot(0.5 * (d11 - d22), d12)
        best = max(best, float(np.max(op)))
    return SurfaceBounds(K=SAFETY * K0, Kp=SAFETY * best, density=int(density))


def _extent(chart: SurfaceChart) -> float:
    X = chart.position(_grid(chart, 9))
    return float(np.max(np.ptp(X, axis=0))) or 1.0


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    return [float(t) for t in str(text).replace(",", " ").split()]


def _get(cfg: Mapping, key: str, default=None, *, required=False) -> float:
    if key not in cfg:
        if required:
            raise ConfigError(f"missing key '{key}'")
        return default
    vals = _floats(cfg[key])
    if len(vals) != 1:
        raise ConfigError(f"key '{key}' expects one number")
    return vals[0]


def chart_from_config(cfg: Mapping) -> SurfaceChart:
    """Build a chart from a flat key-value mapping.

    Recognized keys (values are decimal numbers; lists are comma separated):

    ``kind``
        ``sphere | plane | cylinder | torus | spheroid |
        surface-of-revolution | triaxial-ellipsoid | monge-patch |
        umbilic-patch``.
    ``R``, ``r``, ``a``, ``b``, ``c``, ``height``, ``half_width``
        Shape parameters of the respective kinds.
    ``r_poly``, ``r_cos``, ``r_sin``, ``z_poly``, ``z_cos``, ``z_sin``
        Profile of a general surface of revolution; trigonometric lists are
        flattened ``frequency, amplitude`` pairs.
    ``c20, c11, c02, c30, c21, c12, c03, ...``
        Monge polynomial coefficients of ``x^p y^q``.
    ``pattern``, ``kappa``, ``cubic_scale``
        Umbilic patches (see :func:`curvnet.netgen.umbilic_patch`).
    ``domain``
        ``u0, u1, v0, v1``; overrides the parameter rectangle (non-periodic
        axes only; periodic axes keep their full period).
    """
    kind = str(cfg.get("kind", "")).strip().lower()
    dom = _floats(cfg["domain"]) if "domain" in cfg else None
    if dom is not None and len(dom) != 4:
        raise ConfigError("domain expects four numbers u0, u1, v0, v1")

    if kind == "sphere":
        lat = (dom[2], dom[3]) if dom else (-math.pi / 3, math.pi / 3)
        chart = sphere(_get(cfg, "R", 1.0), lat)
    elif kind == "cylinder":
        chart = cylinder(_get(cfg, "r", 1.0), _get(cfg, "height", 1.0))
        if dom:
            chart = _with_domain(chart, dom)
    elif kind == "torus":
        chart = torus(_get(cfg, "R", 2.0), _get(cfg, "r", 0.5))
    elif kind == "spheroid":
        lat = (dom[2], dom[3]) if dom else (-1.0, 1.0)
        chart = spheroid(_get(cfg, "a", 1.3), _get(cfg, "c", 0.9), lat)
    elif kind == "surface-of-revolution":
        def prof(prefix):
            poly = tuple(_floats(cfg.get(prefix + "_poly", "")))
            cs = _floats(cfg.get(prefix + "_cos", ""))
            sn = _floats(cfg.get(prefix + "_sin", ""))
            if len(cs) % 2 or len(sn) % 2:
                raise ConfigError(f"{prefix}_cos/{prefix}_sin expect frequency, amplitude pairs")
            return Profile(poly=poly, cos=tuple(zip(cs[::2], cs[1::2])), sin=tuple(zip(sn[::2], sn[1::2])))
        if not dom:
            raise ConfigError("surface-of-revolution needs a domain")
        chart = RevolutionChart(domain=tuple(dom), periodic=(abs(dom[1] - dom[0] - TWO_PI) < 1e-12, False),
                                radius=prof("r"), height=prof("z"))
    elif kind == "triaxial-ellipsoid":
        vr = (dom[2], dom[3]) if dom else (-1.2, 1.2)
        chart = triaxial_ellipsoid(_get(cfg, "a", 2.0), _get(cfg, "b", 1.5), _get(cfg, "c", 1.0), vr)
    elif kind == "plane":
        chart = plane(_get(cfg, "half_width", 1.0))
    elif kind == "monge-patch":
        coeffs = {}
        for key in cfg:
            if len(key) == 3 and key[0] == "c" and key[1:].isdigit():
                coeffs[int(key[1]), int(key[2])] = _get(cfg, key)
        chart = monge_patch(coeffs, _get(cfg, "half_width", 1.0))
    elif kind == "umbilic-patch":
        from .netgen.umbilic import umbilic_patch

        chart = umbilic_patch(str(cfg.get("pattern", "lemon")).strip(), kappa=_get(cfg, "kappa", 1.0),
                              cubic_scale=_get(cfg, "cubic_scale", 1.0),
                              half_width=_get(cfg, "half_width", 0.2))
    else:
        raise ConfigError(f"unknown surface kind '{kind}'")
    return chart


def _with_domain(chart: SurfaceChart, dom) -> SurfaceChart:
    import dataclasses

    u0, u1, v0, v1 = dom
    per_u = chart.periodic[0] and abs((u1 - u0) - TWO_PI) < 1e-12
    return dataclasses.replace(chart, domain=(u0, u1, v0, v1), periodic=(per_u, chart.periodic[1]))
