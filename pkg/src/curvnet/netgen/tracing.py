"""Integration of principal curvature lines in the parameter domain.

Curves are integrated in arc length: the state is the parameter point ``y``
and the right-hand side is the parameter-space image ``J^+ v`` of the unit
principal direction ``v`` of the requested family, whose sign is kept
continuous by aligning every stage with the direction at the start of the
step.  Classical RK4 steps are controlled by step doubling; accepted steps are
Richardson-extrapolated.  Many curves are advanced together as one batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ImmersionError, TraceFailureError, UmbilicAmbiguityError
from ..surface import SurfaceChart, _core

__all__ = [
    "TraceConfig", "TracedCurve", "trace_principal_line", "trace_batch", "hermite",
    "TARGET", "BOUNDARY_STOP", "UMBILIC_STOP", "MAX_STEPS", "FAILED", "CLOSED",
]

TARGET, BOUNDARY_STOP, UMBILIC_STOP, MAX_STEPS, FAILED, CLOSED = range(6)
STOP_NAMES = {TARGET: "target", BOUNDARY_STOP: "boundary", UMBILIC_STOP: "umbilic",
              MAX_STEPS: "max-steps", FAILED: "failed", CLOSED: "closed"}


@dataclass(frozen=True)
class TraceConfig:
    """Integrator settings.

    Attributes
    ----------
    step : float
        Initial integrator step, in parameter units (converted to arc length
        with the local metric at the seed).
    sample_spacing : float
        Largest arc length between consecutive polyline nodes; also the step cap.
    umbilic_stop : float
        Traces stop at this ambient distance from a known umbilic.
    max_steps : int
        Hard cap on accepted plus rejected steps per batch.
    tol : float
        Local error tolerance per step (parameter units, relative to ``1 + |y|``).
    """

    step: float = 1e-2
    sample_spacing: float = 1e-2
    umbilic_stop: float = 1e-3
    max_steps: int = 200_000
    tol: float = 1e-12

    def __post_init__(self):
        for name in ("step", "sample_spacing", "umbilic_stop", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"TraceConfig.{name} must be positive")
        if self.max_steps <= 0:
            raise ValueError("TraceConfig.max_steps must be positive")


@dataclass
class TracedCurve:
    """A traced curvature line.

    Attributes
    ----------
    family : int
    uv : (n, 2) parameter nodes, *unwrapped* on periodic axes.
    s : (n,) arc length at the nodes, starting at 0.
    a : (n, 2) unit-speed parameter tangents ``d uv / ds`` at the nodes.
    status : int
        Stop reason (one of the module constants).
    closed : bool
        The curve returned to its seed; the last node equals the seed shifted
        by whole periods.
    """

    family: int
    uv: np.ndarray
    s: np.ndarray
    a: np.ndarray
    status: int
    closed: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def length(self) -> float:
        return float(self.s[-1])

    @property
    def status_name(self) -> str:
        return STOP_NAMES[self.status]

    def at(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Hermite-interpolated parameter point and tangent at arc length ``s``."""
        s = np.clip(np.asarray(s, float), self.s[0], self.s[-1])
        k = np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, len(self.s) - 2)
        h = self.s[k + 1] - self.s[k]
        t = np.where(h > 0, (s - self.s[k]) / np.where(h > 0, h, 1.0), 0.0)
        return hermite(self.uv[k], self.uv[k + 1], self.a[k] * h[..., None], self.a[k + 1] * h[..., None], t)

    def reversed(self) -> "TracedCurve":
        L = self.s[-1]
        return TracedCurve(self.family, self.uv[::-1].copy(), (L - self.s[::-1]).copy(), -self.a[::-1],
                           self.status, self.closed, dict(self.meta))


def hermite(p0, p1, m0, m1, t):
    """Cubic Hermite interpolant and its ``t``-derivative (``m`` are ``dp/dt``)."""
    t = np.asarray(t, float)[..., None]
    t2, t3 = t * t, t * t * t
    h00, h10, h01, h11 = 2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2
    p = h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1
    d00, d10, d01, d11 = 6 * t2 - 6 * t, 3 * t2 - 4 * t + 1, -6 * t2 + 6 * t, 3 * t2 - 2 * t
    dp = d00 * p0 + d10 * m0 + d01 * p1 + d11 * m1
    return p, dp


# ---------------------------------------------------------------- field


class _Field:
    """Batched evaluation of the signed unit principal direction field."""

    def __init__(self, chart: SurfaceChart, family):
        self.chart = chart
        self.family = family

    def __call__(self, y, ref):
        """Return ``(a, v, ok)``: parameter tangent, ambient direction, validity."""
        m = len(y)
        a = np.full((m, 2), np.nan)
        v = np.full((m, 3), np.nan)
        ok = np.zeros(m, bool)
        if m == 0:
            return a, v, ok
        yw = self.chart.wrap(y)
        finite = np.all(np.isfinite(yw), axis=-1)
        idx = np.nonzero(finite)[0]
        try:
            g = _core(self.chart, yw[idx, 0], yw[idx, 1], order=2)
        except ImmersionError:
            # evaluate point by point to isolate the degenerate ones
            keep = []
            for i in idx:
                try:
                    _core(self.chart, yw[i:i + 1, 0], yw[i:i + 1, 1], order=2)
                    keep.append(i)
                except ImmersionError:
                    pass
            idx = np.asarray(keep, dtype=np.int64)
            if len(idx) == 0:
                return a, v, ok
            g = _core(self.chart, yw[idx, 0], yw[idx, 1], order=2)
        fam = np.broadcast_to(np.asarray(self.family), (m,))[idx]
        d = np.where((fam == 1)[:, None], g["v1"], g["v2"])
        sgn = np.sign(np.einsum("ij,ij->i", d, ref[idx]))
        d = d * np.where(sgn < 0, -1.0, 1.0)[:, None]
        P = g["P"]
        Xu, Xv = P[1, 0], P[0, 1]
        bu, bv = np.einsum("ij,ij->i", Xu, d), np.einsum("ij,ij->i", Xv, d)
        det = g["det"]
        a[idx] = np.stack([(g["G"] * bu - g["F"] * bv) / det, (g["E"] * bv - g["F"] * bu) / det], -1)
        v[idx] = d
        ok[idx] = ~g["umbilic"]
        return a, v, ok


def _rk4(field_, y, h, ref, a0):
    hh = h[:, None]
    k1 = a0
    k2, _, o2 = field_(y + 0.5 * hh * k1, ref)
    k3, _, o3 = field_(y + 0.5 * hh * k2, ref)
    k4, _, o4 = field_(y + hh * k3, ref)
    return y + hh * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0, o2 & o3 & o4


def _outside(chart: SurfaceChart, y) -> np.ndarray:
    out = np.zeros(len(y), bool)
    for ax in (0, 1):
        if not chart.periodic[ax]:
            lo, hi = chart.domain[2 * ax], chart.domain[2 * ax + 1]
            out |= (y[:, ax] < lo) | (y[:, ax] > hi)
    return out


def _boundary_hit(chart: SurfaceChart, y0, y1, m0, m1):
    """First Hermite parameter ``t`` in (0, 1] at which the step leaves the domain."""
    ts = np.linspace(0.0, 1.0, 65)
    best_t, best_ax, best_val = 1.0, None, None
    for ax in (0, 1):
        if chart.periodic[ax]:
            continue
        for bound in (chart.domain[2 * ax], chart.domain[2 * ax + 1]):
            p, _ = hermite(y0, y1, m0, m1, ts)
            f = p[:, ax] - bound
            sgn0 = np.sign(f[0]) if f[0] != 0 else 1.0
            cross = np.nonzero(np.sign(f[1:]) != sgn0)[0]
            if len(cross) == 0:
                continue
            lo, hi = ts[cross[0]], ts[cross[0] + 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                pm, _ = hermite(y0, y1, m0, m1, mid)
                if np.sign(pm[ax] - bound) == sgn0:
                    lo = mid
                else:
                    hi = mid
            if hi < best_t or best_ax is None:
                best_t, best_ax, best_val = hi, ax, bound
    p, _ = hermite(y0, y1, m0, m1, best_t)
    if best_ax is not None:
        p = p.copy()
        p[best_ax] = best_val
    return best_t, p


def _closest_on_step(y0, y1, m0, m1, target, period):
    """Smallest parameter distance from the Hermite step to ``target`` (mod periods)."""
    ts = np.linspace(0.0, 1.0, 33)
    p, _ = hermite(y0, y1, m0, m1, ts)
    d = p - target
    for ax in (0, 1):
        if period[ax]:
            d[:, ax] -= period[ax] * np.round(d[:, ax] / period[ax])
    dist = np.linalg.norm(d, axis=-1)
    k = int(np.argmin(dist))
    lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, len(ts) - 1)]
    # golden-section refinement of the distance on [lo, hi]
    gr = 0.5 * (np.sqrt(5.0) - 1.0)

    def dist_at(t):
        q, _ = hermite(y0, y1, m0, m1, t)
        dd = q - target
        for ax in (0, 1):
            if period[ax]:
                dd[ax] -= period[ax] * np.round(dd[ax] / period[ax])
        return float(np.linalg.norm(dd))

    c, e = hi - gr * (hi - lo), lo + gr * (hi - lo)
    for _ in range(60):
        if dist_at(c) < dist_at(e):
            hi = e
        else:
            lo = c
        c, e = hi - gr * (hi - lo), lo + gr * (hi - lo)
    t = 0.5 * (lo + hi)
    return t, dist_at(t)


# ---------------------------------------------------------------- batch tracer


def trace_batch(chart: SurfaceChart, seeds, family, direction, lengths, cfg: TraceConfig = TraceConfig(),
                *, stop_points=None, close: bool = False, close_tol: float = 1e-7,
                raise_on_umbilic_seed: bool = True) -> list[TracedCurve]:
    """Trace many curvature lines at once.

    Parameters
    ----------
    seeds : (n, 2) parameter points.
    family : int or (n,) ints
    direction : (n,) signs (+1 follows the frame's ``v_family``, -1 the
        opposite) or (n, 3) ambient reference vectors.
    lengths : float or (n,) target arc lengths.
    stop_points : (m, 3), optional
        Ambient points (umbilics) at which traces stop within
        ``cfg.umbilic_stop``; defaults to the chart's known umbilics.
    close : bool
        Detect returns to the seed (closed lines on periodic charts).

    Returns
    -------
    list of TracedCurve, one per seed (failed traces carry status ``FAILED``).
    """
    seeds = np.atleast_2d(np.asarray(seeds, float))
    n = len(seeds)
    fam = np.broadcast_to(np.asarray(family, np.int64), (n,)).copy()
    L = np.broadcast_to(np.asarray(lengths, float), (n,)).copy()
    fld = _Field(chart, fam)
    if stop_points is None:
        up = chart.umbilic_points()
        stop_points = chart.position(up) if len(up) else np.zeros((0, 3))
    stop_points = np.asarray(stop_points, float).reshape(-1, 3)
    period = [(chart.domain[1] - chart.domain[0]) if chart.periodic[0] else 0.0,
              (chart.domain[3] - chart.domain[2]) if chart.periodic[1] else 0.0]

    # initial directions
    direction = np.asarray(direction, float)
    fr = _core(chart, *chart.wrap(seeds).T, order=2)
    v0 = np.where((fam == 1)[:, None], fr["v1"], fr["v2"])
    if direction.ndim == 2:
        ref = direction
    else:
        ref = v0 * np.broadcast_to(direction, (n,))[:, None]
    a, v, ok = fld(seeds, ref)
    if raise_on_umbilic_seed and np.any(~ok):
        raise UmbilicAmbiguityError(f"{int(np.count_nonzero(~ok))} seed(s) at umbilics or degenerate points")
    speed0 = np.sqrt(fr["E"])  # arc length per unit u-step, a crude scale
    h = np.minimum(cfg.step * np.maximum(speed0, 1e-300), cfg.sample_spacing)

    y = seeds.copy()
    s = np.zeros(n)
    status = np.full(n, -1)
    status[~ok] = FAILED
    closed = np.zeros(n, bool)
    hist_idx, hist_y, hist_s, hist_a = [np.arange(n)], [y.copy()], [s.copy()], [a.copy()]
    h_min = 1e-14 * max(1.0, cfg.sample_spacing)
    steps = 0
    active = status < 0
    while np.any(active) and steps < cfg.max_steps:
        steps += 1
        idx = np.nonzero(active)[0]
        yi, ai, vi, si = y[idx], a[idx], v[idx], s[idx]
        fld.family = fam[idx]
        hi = np.minimum(h[idx], L[idx] - si)
        hi = np.maximum(hi, 0.0)
        big, ok1 = _rk4(fld, yi, hi, vi, ai)
        half = 0.5 * hi
        mid, ok2 = _rk4(fld, yi, half, vi, ai)
        am, vm, okm = fld(mid, vi)
        small, ok3 = _rk4(fld, mid, half, vm, am)
        good = ok1 & ok2 & ok3 & okm & np.all(np.isfinite(small), -1) & np.all(np.isfinite(big), -1)
        err = np.linalg.norm(small - big, axis=-1) / 15.0
        tol = cfg.tol * (1.0 + np.linalg.norm(yi, axis=-1))
        accept = good & (err <= tol)
        ynew = small + (small - big) / 15.0
        # step size update
        with np.errstate(divide="ignore"):
            fac = np.where(err > 0, 0.9 * (tol / err) ** 0.2, 2.0)
        fac = np.clip(fac, 0.2, 2.0)
        fac = np.where(good, fac, 0.25)
        hnew = np.minimum(np.where(accept, hi * fac, hi * np.minimum(fac, 0.5)), cfg.sample_spacing)
        # the capped step at the target must not shrink the next regular step
        hnew = np.where(accept & (hi < h[idx]), np.maximum(hnew, h[idx]), hnew)
        h[idx] = np.minimum(hnew, cfg.sample_spacing)
        collapse = ~accept & (hi * fac < h_min) & (hi > 0)
        status[idx[collapse]] = FAILED

        acc = idx[accept]
        if len(acc) == 0:
            active = status < 0
            continue
        anew, vnew, oknew = fld.__class__(chart, fam[acc])(ynew[accept], vi[accept])
        y0, a0, s0 = y[acc], a[acc], s[acc]
        hs = hi[accept]
        y1, s1, a1 = ynew[accept], s0 + hs, anew
        st_new = np.full(len(acc), -1)
        # boundary crossing
        out = _outside(chart, y1)
        for j in np.nonzero(out)[0]:
            t, p = _boundary_hit(chart, y0[j], y1[j], a0[j] * hs[j], a1[j] * hs[j])
            _, dp = hermite(y0[j], y1[j], a0[j] * hs[j], a1[j] * hs[j], t)
            y1[j], s1[j] = p, s0[j] + t * hs[j]
            nrm = np.linalg.norm(dp)
            a1[j] = dp / nrm * np.linalg.norm(a0[j]) if nrm > 0 else a0[j]
            st_new[j] = BOUNDARY_STOP
        # closure
        if close:
            dd = seeds[acc] - y1
            for ax in (0, 1):
                if period[ax]:
                    dd[:, ax] -= period[ax] * np.round(dd[:, ax] / period[ax])
            near = np.linalg.norm(dd, axis=-1) <= 2.0 * np.linalg.norm(y1 - y0, axis=-1) + 1e-12
            for j in np.nonzero((st_new < 0) & (s1 > 4 * cfg.sample_spacing) & near)[0]:
                i = acc[j]
                t, dist = _closest_on_step(y0[j], y1[j], a0[j] * hs[j], a1[j] * hs[j], seeds[i], period)
                if dist < close_tol * (1.0 + np.linalg.norm(seeds[i])):
                    p, _ = hermite(y0[j], y1[j], a0[j] * hs[j], a1[j] * hs[j], t)
                    shift = seeds[i] - p
                    for ax in (0, 1):
                        if period[ax]:
                            shift[ax] -= period[ax] * np.round(shift[ax] / period[ax])
                    y1[j] = p + shift
                    s1[j] = s0[j] + t * hs[j]
                    a1[j] = hist_a[0][i]
                    st_new[j] = CLOSED
                    closed[i] = True
        # umbilic proximity
        if len(stop_points):
            X = chart.position(chart.wrap(y1))
            d = np.min(np.linalg.norm(X[:, None, :] - stop_points[None], axis=-1), axis=1)
            st_new[(st_new < 0) & (d < cfg.umbilic_stop)] = UMBILIC_STOP
        st_new[(st_new < 0) & ~oknew & ~out] = FAILED
        st_new[(st_new < 0) & (s1 >= L[acc] * (1 - 1e-15))] = TARGET
        y[acc], s[acc], a[acc], v[acc] = y1, s1, a1, np.where(np.isnan(vnew), v[acc], vnew)
        status[acc] = np.where(st_new >= 0, st_new, status[acc])
        keep = st_new != FAILED
        hist_idx.append(acc[keep])
        hist_y.append(y1[keep].copy())
        hist_s.append(s1[keep].copy())
        hist_a.append(a1[keep].copy())
        active = status < 0
    status[status < 0] = MAX_STEPS

    I = np.concatenate(hist_idx)
    Y, S, A = np.concatenate(hist_y), np.concatenate(hist_s), np.concatenate(hist_a)
    order = np.lexsort((S, I))
    I, Y, S, A = I[order], Y[order], S[order], A[order]
    bounds = np.searchsorted(I, np.arange(n + 1))
    curves = []
    for i in range(n):
        lo, hi_ = bounds[i], bounds[i + 1]
        curves.append(TracedCurve(int(fam[i]), Y[lo:hi_], S[lo:hi_], A[lo:hi_], int(status[i]), bool(closed[i]),
                                  dict(seed=seeds[i].copy())))
    return curves


def trace_principal_line(chart: SurfaceChart, seed, family: int, length: float, cfg: TraceConfig = TraceConfig(),
                         direction=1.0, *, close: bool = False, stop_points=None) -> TracedCurve:
    """Trace one curvature line of ``family`` from ``seed`` for ``length``.

    Parameters
    ----------
    direction : +1, -1 or ambient reference vector
        Selects which way along the line field to go.

    Raises
    ------
    UmbilicAmbiguityError
        If the seed is an umbilic.
    TraceFailureError
        On step collapse; the exception carries the partial curve.

    Examples
    --------
    >>> from curvnet.surface import cylinder
    >>> c = trace_principal_line(cylinder(), (0.3, 0.5), 1, 0.4)
    >>> round(float(c.length), 12), c.status_name
    (0.4, 'target')
    """
    if length <= 0:
        raise ValueError("length must be positive")
    d = np.asarray(direction, float)
    d = d.reshape(1, 3) if d.size == 3 else d.reshape(1)
    c = trace_batch(chart, np.reshape(seed, (1, 2)), family, d, length, cfg, close=close,
                    stop_points=stop_points)[0]
    if c.status == FAILED:
        raise TraceFailureError(f"trace of family {family} from {tuple(np.ravel(seed))} collapsed at s={c.length:.6g}",
                                partial=c)
    return c
