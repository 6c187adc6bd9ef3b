"""Nets assembled from traced curvature lines and their mutual intersections."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ..errors import NetConstructionError
from ..surface import SurfaceChart, principal_frames
from .net import CurvatureLineNet, assemble_net
from .revolution import arc_length
from .tracing import CLOSED, FAILED, TraceConfig, TracedCurve, hermite, trace_batch

__all__ = ["CurveSet", "trace_through", "find_intersections", "build_arrangement", "fill_gaps", "traced_net",
           "seed_lattice", "restrict"]


# ---------------------------------------------------------------- curve sets


def _period(chart: SurfaceChart) -> np.ndarray:
    return np.array([(chart.domain[1] - chart.domain[0]) if chart.periodic[0] else 0.0,
                     (chart.domain[3] - chart.domain[2]) if chart.periodic[1] else 0.0])


def _join(back: TracedCurve, fwd: TracedCurve) -> TracedCurve:
    """Concatenate ``reversed(back)`` and ``fwd`` (both start at the same seed)."""
    rb = back.reversed()
    s = np.concatenate([rb.s, fwd.s[1:] + rb.s[-1]])
    uv = np.concatenate([rb.uv, fwd.uv[1:]])
    a = np.concatenate([rb.a, fwd.a[1:]])
    meta = dict(fwd.meta)
    meta["seed_s"] = float(rb.s[-1])
    meta["stops"] = (back.status, fwd.status)
    return TracedCurve(fwd.family, uv, s, a, fwd.status, False, meta)


def trace_through(chart: SurfaceChart, seeds, family, cfg: TraceConfig, max_length: float, *,
                  close: bool = False, stop_points=None) -> list[TracedCurve]:
    """Trace full curvature lines through ``seeds`` (both directions).

    With ``close`` a curve that returns to its seed is kept as one closed loop.
    Curves whose trace failed are dropped (``None`` in the output).
    """
    seeds = np.atleast_2d(np.asarray(seeds, float))
    n = len(seeds)
    if n == 0:
        return []
    fam = np.broadcast_to(np.asarray(family, np.int64), (n,))
    fwd = trace_batch(chart, seeds, fam, np.ones(n), max_length, cfg, close=close, stop_points=stop_points,
                      raise_on_umbilic_seed=False)
    need = [i for i, c in enumerate(fwd) if not c.closed and c.status != FAILED]
    back = {}
    if need:
        bs = trace_batch(chart, seeds[need], fam[need], -np.ones(len(need)), max_length, cfg,
                         stop_points=stop_points, raise_on_umbilic_seed=False)
        back = dict(zip(need, bs))
    out = []
    for i, c in enumerate(fwd):
        if c.status == FAILED or (i in back and back[i].status == FAILED):
            out.append(None)
        elif c.closed:
            c.meta["seed_s"] = 0.0
            out.append(c)
        else:
            out.append(_join(back[i], c))
    return out


@dataclass
class CurveSet:
    """Traced curves plus the umbilic vertices at which some of them start.

    ``starts[i]`` is the index into ``umbilic_uv`` of the umbilic the curve
    ``i`` emanates from (``-1`` for ordinary curves).
    """

    chart: SurfaceChart
    curves: list = field(default_factory=list)
    starts: list = field(default_factory=list)
    umbilic_uv: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def add(self, curve: TracedCurve, start: int = -1) -> None:
        self.curves.append(curve)
        self.starts.append(start)

    def family_points(self, family: int, ordinary_only: bool = False) -> np.ndarray:
        """Positions of all curve nodes of ``family`` (optionally skipping curves that start at umbilics)."""
        pts = [c.uv for c, st in zip(self.curves, self.starts) if c.family == family and not (ordinary_only and st >= 0)]
        if not pts:
            return np.zeros((0, 3))
        return self.chart.position(self.chart.wrap(np.concatenate(pts)))


# ---------------------------------------------------------------- intersections


def _segments(chart, curves, ids):
    """Wrapped straight segments of the node polylines of ``curves[ids]``."""
    per = _period(chart)
    P0, P1, C, K, SH = [], [], [], [], []
    for i in ids:
        c = curves[i]
        k = np.arange(len(c.uv) - 1)
        p0 = chart.wrap(c.uv[:-1])
        shift0 = p0 - c.uv[:-1]  # added to unwrapped coords to get wrapped ones
        p1 = p0 + (c.uv[1:] - c.uv[:-1])
        P0.append(p0), P1.append(p1), C.append(np.full(len(k), i)), K.append(k), SH.append(shift0)
        # copies shifted back by one period where a segment pokes out of the domain
        for ax in (0, 1):
            if per[ax]:
                lo, hi = chart.domain[2 * ax], chart.domain[2 * ax + 1]
                for over, sgn in ((p1[:, ax] > hi, -1.0), (p1[:, ax] < lo, 1.0)):
                    if np.any(over):
                        d = np.zeros(2)
                        d[ax] = sgn * per[ax]
                        P0.append(p0[over] + d), P1.append(p1[over] + d), C.append(np.full(over.sum(), i))
                        K.append(k[over]), SH.append(shift0[over] + d)
    if not P0:
        z = np.zeros((0, 2))
        return z, z, np.zeros(0, np.int64), np.zeros(0, np.int64), z
    return (np.concatenate(P0), np.concatenate(P1), np.concatenate(C), np.concatenate(K), np.concatenate(SH))


class _Flat:
    """All curves' nodes in flat arrays for vectorized Hermite evaluation."""

    def __init__(self, curves):
        self.off = np.concatenate([[0], np.cumsum([len(c.s) for c in curves])])
        self.uv = np.concatenate([c.uv for c in curves])
        self.s = np.concatenate([c.s for c in curves])
        self.a = np.concatenate([c.a for c in curves])
        self.L = np.array([c.s[-1] for c in curves])

    def at(self, ci, s):
        lo, hi = self.off[ci], self.off[ci + 1]
        s = np.clip(s, self.s[lo], self.s[hi - 1])
        # per-curve binary search, vectorized
        left, right = lo.copy(), hi - 1
        while True:
            act = right - left > 1
            if not np.any(act):
                break
            mid = (left + right) // 2
            go = self.s[mid] <= s
            left = np.where(act & go, mid, left)
            right = np.where(act & ~go, mid, right)
        k = left
        h = self.s[k + 1] - self.s[k]
        t = np.where(h > 0, (s - self.s[k]) / np.where(h > 0, h, 1.0), 0.0)
        return hermite(self.uv[k], self.uv[k + 1], self.a[k] * h[:, None], self.a[k + 1] * h[:, None], t)


@dataclass
class Intersections:
    ci: np.ndarray  # (m,) curve of family 1
    cj: np.ndarray  # (m,) curve of family 2
    si: np.ndarray
    sj: np.ndarray
    uv: np.ndarray  # wrapped parameter point
    angle: np.ndarray  # crossing angle on the surface


def find_intersections(chart: SurfaceChart, curves: list, *, min_angle: float = 0.0,
                       exclude_points=None, exclude_radius: float = 0.0, tol: float = 1e-12) -> Intersections:
    """All crossings of family-1 with family-2 curves.

    Candidate segment pairs come from a k-d tree on segment midpoints;
    crossings of the straight node segments are refined by Newton's method on
    the Hermite interpolants of both curves.  Crossings at an angle below
    ``min_angle`` and crossings within ``exclude_radius`` (parameter
    distance) of ``exclude_points`` are dropped.
    """
    ids1 = [i for i, c in enumerate(curves) if c.family == 1]
    ids2 = [i for i, c in enumerate(curves) if c.family == 2]
    empty = Intersections(*(np.zeros(0, np.int64),) * 2, np.zeros(0), np.zeros(0), np.zeros((0, 2)), np.zeros(0))
    if not ids1 or not ids2:
        return empty
    A0, A1, AC, AK, ASH = _segments(chart, curves, ids1)
    B0, B1, BC, BK, BSH = _segments(chart, curves, ids2)
    la = np.linalg.norm(A1 - A0, axis=-1)
    lb = np.linalg.norm(B1 - B0, axis=-1)
    r = 0.5 * (la.max() + lb.max()) * 1.05 + 1e-15
    tb = cKDTree(0.5 * (B0 + B1))
    lists = tb.query_ball_point(0.5 * (A0 + A1), r)
    cnt = np.array([len(x) for x in lists])
    if cnt.sum() == 0:
        return empty
    ia = np.repeat(np.arange(len(A0)), cnt)
    ib = np.concatenate([np.asarray(x, np.int64) for x in lists if len(x)])
    p, dp = A0[ia], A1[ia] - A0[ia]
    q, dq = B0[ib], B1[ib] - B0[ib]
    den = dp[:, 0] * dq[:, 1] - dp[:, 1] * dq[:, 0]
    w = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[:, 0] * dq[:, 1] - w[:, 1] * dq[:, 0]) / den
        u = (w[:, 0] * dp[:, 1] - w[:, 1] * dp[:, 0]) / den
    m = 0.02
    hit = (den != 0) & (t >= -m) & (t <= 1 + m) & (u >= -m) & (u <= 1 + m)
    ia, ib, t, u = ia[hit], ib[hit], t[hit], u[hit]
    if len(ia) == 0:
        return empty

    flat = _Flat(curves)
    ci, cj = AC[ia], BC[ib]
    si0 = flat.s[flat.off[ci] + AK[ia]]
    si1 = flat.s[flat.off[ci] + AK[ia] + 1]
    sj0 = flat.s[flat.off[cj] + BK[ib]]
    sj1 = flat.s[flat.off[cj] + BK[ib] + 1]
    si = si0 + np.clip(t, 0, 1) * (si1 - si0)
    sj = sj0 + np.clip(u, 0, 1) * (sj1 - sj0)
    # offset between the unwrapped coordinates of the two curves at this crossing
    off = ASH[ia] - BSH[ib]
    conv = np.zeros(len(si), bool)
    for _ in range(30):
        pi, di = flat.at(ci, si)
        pj, dj = flat.at(cj, sj)
        # derivatives of the Hermite pieces w.r.t. s: tangent ~ a (unit speed)
        hi_ = np.maximum(si1 - si0, 1e-300)
        hj_ = np.maximum(sj1 - sj0, 1e-300)
        ti, tj = di / hi_[:, None], dj / hj_[:, None]
        F = (pi + off) - pj
        J = np.stack([ti, -tj], axis=-1)  # (m, 2, 2)
        detJ = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        ok = np.abs(detJ) > 1e-300
        step = np.zeros_like(F)
        step[ok] = np.linalg.solve(J[ok], -F[ok][..., None])[..., 0]
        si = si + step[:, 0]
        sj = sj + step[:, 1]
        # keep the refinement local (the node index may change)
        si = np.clip(si, flat.s[flat.off[ci]], flat.s[flat.off[ci + 1] - 1])
        sj = np.clip(sj, flat.s[flat.off[cj]], flat.s[flat.off[cj + 1] - 1])
        conv = np.linalg.norm(F, axis=-1) <= tol * (1 + np.abs(pi).max(axis=-1))
        if np.all(conv | ~ok):
            break
        # recompute the bracketing node spans for the new arc lengths
        si0, si1 = _span(flat, ci, si)
        sj0, sj1 = _span(flat, cj, sj)
    pi, di = flat.at(ci, si)
    pj, dj = flat.at(cj, sj)
    res = np.linalg.norm(pi + off - pj, axis=-1)
    good = res <= 1e-9
    # stay on the curves (not extrapolated beyond the ends)
    good &= (si >= flat.s[flat.off[ci]] - 1e-12) & (si <= flat.L[ci] + 1e-12)
    good &= (sj >= flat.s[flat.off[cj]] - 1e-12) & (sj <= flat.L[cj] + 1e-12)
    # robust crossings that failed to localize are construction errors
    robust = (t > 0.1) & (t < 0.9) & (u > 0.1) & (u < 0.9)
    if np.any(robust & ~good):
        k = int(np.nonzero(robust & ~good)[0][0])
        raise NetConstructionError(
            f"failed to localize the crossing of curves {int(ci[k])} and {int(cj[k])} near uv={tuple(A0[ia[k]])}")
    ci, cj, si, sj, uvp = ci[good], cj[good], si[good], sj[good], chart.wrap(pi[good] + off[good])
    # dedupe (same pair, same place; closed curves meet their seam twice)
    key = np.lexsort((sj, si, cj, ci))
    ci, cj, si, sj, uvp = ci[key], cj[key], si[key], sj[key], uvp[key]
    keep = np.ones(len(ci), bool)
    if len(ci) > 1:
        Xp = chart.position(uvp)
        for a, b in sorted(cKDTree(Xp).query_pairs(1e-8 * (1.0 + np.abs(Xp).max()))):
            if keep[a] and ci[a] == ci[b] and cj[a] == cj[b]:
                keep[b] = False
    ci, cj, si, sj, uvp = ci[keep], cj[keep], si[keep], sj[keep], uvp[keep]
    # crossing angle on the surface
    _, di = flat.at(ci, si)
    _, dj = flat.at(cj, sj)
    fr = principal_frames(chart, uvp)
    ti = fr["Xu"] * di[:, :1] + fr["Xv"] * di[:, 1:]
    tj = fr["Xu"] * dj[:, :1] + fr["Xv"] * dj[:, 1:]
    cosang = np.abs(np.einsum("ij,ij->i", ti, tj)) / (np.linalg.norm(ti, axis=-1) * np.linalg.norm(tj, axis=-1))
    ang = np.arccos(np.clip(cosang, 0, 1))
    keep = ang >= min_angle
    if exclude_points is not None and len(exclude_points) and exclude_radius > 0:
        dd = np.min(np.linalg.norm(uvp[:, None, :] - np.asarray(exclude_points)[None], axis=-1), axis=1)
        keep &= dd > exclude_radius
    return Intersections(ci[keep], cj[keep], si[keep], sj[keep], uvp[keep], ang[keep])


def _span(flat: _Flat, ci, s):
    lo, hi = flat.off[ci], flat.off[ci + 1]
    left, right = lo.copy(), hi - 1
    s = np.clip(s, flat.s[lo], flat.s[hi - 1])
    while True:
        act = right - left > 1
        if not np.any(act):
            break
        mid = (left + right) // 2
        go = flat.s[mid] <= s
        left = np.where(act & go, mid, left)
        right = np.where(act & ~go, mid, right)
    return flat.s[left], flat.s[left + 1]


# ---------------------------------------------------------------- arrangement


def _piece(curve: TracedCurve, s0: float, s1: float, n_min: int = 3):
    """Polyline of ``curve`` between arc lengths ``s0 < s1`` (closed curves may wrap)."""
    L = curve.s[-1]
    if curve.closed and s1 > L:
        shift = curve.uv[-1] - curve.uv[0]
        a = _piece(curve, s0, L, 2)
        b = _piece(curve, 0.0, s1 - L, 2) + shift
        return np.concatenate([a, b[1:]])
    inner = (curve.s > s0) & (curve.s < s1)
    p0, _ = curve.at(np.array([s0]))
    p1, _ = curve.at(np.array([s1]))
    pts = np.concatenate([p0, curve.uv[inner], p1])
    if len(pts) < n_min:
        ts = np.linspace(s0, s1, n_min)
        pts, _ = curve.at(ts)
    return pts


def _tangent(curve: TracedCurve, s: float) -> np.ndarray:
    L = curve.s[-1]
    if curve.closed:
        s = s % L
    _, d = curve.at(np.array([s]))
    return d[0] / np.linalg.norm(d[0])


def build_arrangement(cs: CurveSet, *, min_angle: float = 0.0, fillers=(), meta=None,
                      exclude_radius: float = 0.0) -> CurvatureLineNet:
    """Turn a set of traced curves into a :class:`CurvatureLineNet`.

    Vertices are the family-1/family-2 crossings plus the umbilic points that
    curves start from; each curve is split at its vertices and trimmed after
    its last one (unless it is closed).  ``fillers`` is a list of
    ``(umbilic index, direction angle)`` requests for straight filler edges
    (see :func:`curvnet.netgen.umbilic.umbilic_net`).
    """
    chart = cs.chart
    curves = cs.curves
    X = find_intersections(chart, curves, min_angle=min_angle, exclude_points=cs.umbilic_uv,
                           exclude_radius=exclude_radius)
    nU = len(cs.umbilic_uv)
    n_x = len(X.ci)
    uv = np.concatenate([cs.umbilic_uv.reshape(-1, 2), X.uv])
    # per-curve lists of (s, vertex id)
    marks: list[list] = [[] for _ in curves]
    for k in range(n_x):
        marks[X.ci[k]].append((X.si[k], nU + k))
        marks[X.cj[k]].append((X.sj[k], nU + k))
    for i, st in enumerate(cs.starts):
        if st >= 0:
            marks[i].append((0.0, st))
    edges, fam, length, polys, tans = [], [], [], [], []
    for i, c in enumerate(curves):
        mk = sorted(marks[i])
        if len(mk) < 2 and not (c.closed and len(mk) >= 1):
            continue
        pairs = list(zip(mk[:-1], mk[1:]))
        if c.closed:
            pairs.append((mk[-1], (mk[0][0] + c.s[-1], mk[0][1])))
        for (s0, v0), (s1, v1) in pairs:
            if s1 - s0 <= 1e-12 * (1 + c.s[-1]):
                continue
            pts = _piece(c, s0, s1)
            edges.append((v0, v1))
            fam.append(c.family)
            length.append(s1 - s0)
            polys.append(pts)
            tans.append((_tangent(c, s0), -_tangent(c, s1)))
    # filler edges: straight parameter segments from an umbilic
    E = np.asarray(edges, np.int64).reshape(-1, 2)
    for (ui, ang) in fillers:
        tgt = _filler_target(uv, E, polys, cs.umbilic_uv[ui], ang, ui)
        if tgt is None:
            continue
        p0, p1 = cs.umbilic_uv[ui], uv[tgt]
        d = p1 - p0
        pts = p0 + np.linspace(0, 1, 9)[:, None] * d
        edges.append((ui, tgt))
        fr = principal_frames(chart, np.array([p0]))
        t = fr["Xu"][0] * d[0] + fr["Xv"][0] * d[1]
        fam.append(1 if abs(t @ fr["v1"][0]) >= abs(t @ fr["v2"][0]) else 2)
        length.append(float(arc_length(chart, p0, p1)[0]))
        polys.append(pts)
        dn = d / np.linalg.norm(d)
        tans.append((dn, -dn))
        E = np.asarray(edges, np.int64).reshape(-1, 2)
    # drop isolated vertices
    E = np.asarray(edges, np.int64).reshape(-1, 2)
    used = np.zeros(len(uv), bool)
    used[E.ravel()] = True
    used[:nU] = True
    remap = -np.ones(len(uv), np.int64)
    remap[used] = np.arange(used.sum())
    E = remap[E]
    uv = uv[used]
    umb = np.zeros(len(uv), bool)
    umb[:nU] = True
    net = assemble_net(chart, uv, E, np.asarray(fam), np.asarray(length), polys, np.asarray(tans).reshape(-1, 2, 2),
                       umbilic=umb if nU else None, meta=meta)
    net.meta.setdefault("n_crossings", int(n_x))
    return net


def _filler_target(uv, E, polys, p0, ang, ui):
    """Nearest vertex near direction ``ang`` from ``p0`` reachable without crossing an edge."""
    d = uv - p0
    r = np.linalg.norm(d, axis=-1)
    phi = np.arctan2(d[:, 1], d[:, 0])
    dphi = np.abs((phi - ang + np.pi) % (2 * np.pi) - np.pi)
    cand = np.nonzero((r > 0) & (dphi < np.pi / 4))[0]
    if len(cand) == 0:
        return None
    cand = cand[np.argsort(dphi[cand] * 0.25 + r[cand] / r[cand].max())]
    segs = np.concatenate([np.stack([p[:-1], p[1:]], 1) for p in polys]) if polys else np.zeros((0, 2, 2))
    for c in cand[:20]:
        q = uv[c]
        a, b = segs[:, 0], segs[:, 1]
        dq = q - p0
        db = b - a
        den = dq[0] * db[:, 1] - dq[1] * db[:, 0]
        w = a - p0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (w[:, 0] * db[:, 1] - w[:, 1] * db[:, 0]) / den
            u = (w[:, 0] * dq[1] - w[:, 1] * dq[0]) / den
        cross = (den != 0) & (t > 1e-9) & (t < 1 - 1e-9) & (u > 1e-9) & (u < 1 - 1e-9)
        if not np.any(cross):
            return int(c)
    return None


# ---------------------------------------------------------------- gap filling


def fill_gaps(cs: CurveSet, spacing: float, cfg: TraceConfig, max_length: float, *, region=None,
              keep_out=None, keep_out_radius: float = 0.0, waves: int = 12, close: bool = False) -> int:
    """Add curves of each family where the existing ones leave gaps wider than ``2*spacing``.

    Candidates lie on a grid of pitch ``spacing/2`` (parameter units) inside
    ``region``; distances are measured in space.  Each wave seeds the
    candidates farthest from existing curves and traces them.  Each new curve
    is cut back to the stretch around its seed that stays at least
    ``spacing/2`` away from every accepted curve of its family (curves
    squeezing against a neighbour would create arbitrarily short edges);
    stretches shorter than ``spacing`` are dropped.  Returns the number of curves added.
    """
    chart = cs.chart
    u0, u1, v0, v1 = region if region is not None else chart.domain
    pitch = 0.5 * spacing
    us = np.arange(u0 + 0.5 * pitch, u1, pitch)
    vs = np.arange(v0 + 0.5 * pitch, v1, pitch)
    U, V = np.meshgrid(us, vs, indexing="ij")
    grid = np.stack([U.ravel(), V.ravel()], -1)
    if keep_out is not None and len(keep_out):
        dd = np.min(np.linalg.norm(grid[:, None] - np.asarray(keep_out)[None], axis=-1), axis=1)
        grid = grid[dd > keep_out_radius]
    G = chart.position(chart.wrap(grid))
    added = 0
    for _ in range(waves):
        new_seeds, new_fam = [], []
        for family in (1, 2):
            pts = cs.family_points(family)
            if len(pts):
                dist, _ = cKDTree(pts).query(G)
            else:
                dist = np.full(len(G), np.inf)
            cand = np.nonzero(dist > spacing)[0]
            if len(cand) == 0:
                continue
            cand = cand[np.argsort(-dist[cand], kind="stable")]
            chosen = []
            for c in cand:
                if all(np.linalg.norm(G[c] - G[k]) > 2 * spacing for k in chosen):
                    chosen.append(c)
                if len(chosen) >= 64:
                    break
            new_seeds += [grid[k] for k in chosen]
            new_fam += [family] * len(chosen)
        if not new_seeds:
            break
        seeds = np.asarray(new_seeds)
        traced = trace_through(chart, seeds, np.asarray(new_fam), cfg, max_length, close=close)
        accepted: list[TracedCurve] = []
        for c in traced:
            if c is None:
                continue
            pts = cs.family_points(c.family)
            c = _uncrowded(chart, c, cKDTree(pts) if len(pts) else None, 0.5 * spacing, spacing)
            if c is not None:
                accepted.append(c)
                cs.add(c)
                added += 1
        if not accepted:
            break
    return added


def _uncrowded(chart: SurfaceChart, c: TracedCurve, tree, tol: float, min_len: float) -> TracedCurve | None:
    """Part of ``c`` around its seed whose nodes are ``>= tol`` from the points in ``tree``."""
    if tree is None:
        return c
    d, _ = tree.query(chart.position(chart.wrap(c.uv)))
    free = d >= tol
    if free.all():
        return c
    if c.closed:
        return None
    k = int(np.argmin(np.abs(c.s - c.meta.get("seed_s", 0.0))))
    if not free[k]:
        return None
    lo, hi = k, k
    while lo > 0 and free[lo - 1]:
        lo -= 1
    while hi < len(free) - 1 and free[hi + 1]:
        hi += 1
    if c.s[hi] - c.s[lo] < min_len:
        return None
    meta = dict(c.meta, seed_s=float(c.s[k] - c.s[lo]), trimmed=True)
    return TracedCurve(c.family, c.uv[lo:hi + 1], c.s[lo:hi + 1] - c.s[lo], c.a[lo:hi + 1], c.status, False, meta)


# ---------------------------------------------------------------- traced nets


def seed_lattice(chart: SurfaceChart, n: int, region=None) -> np.ndarray:
    """``n`` seeds on the diagonal of the (sub-)domain ``region``, cell-centred.

    Each diagonal seed contributes one line of each family, so on surfaces of
    revolution this reproduces an ``n x n`` meridian/parallel lattice.
    """
    u0, u1, v0, v1 = region if region is not None else chart.domain
    t = (np.arange(n) + 0.5) / n
    return np.stack([u0 + t * (u1 - u0), v0 + t * (v1 - v0)], -1)


def traced_net(chart: SurfaceChart, seeds, cfg: TraceConfig = TraceConfig(), *, spacing: float | None = None,
               region=None, max_length: float | None = None, min_angle: float = 1.0 / 16.0,
               dedupe_tol: float | None = None) -> CurvatureLineNet:
    """Net of curvature lines through ``seeds`` (both families).

    Parameters
    ----------
    seeds : (n, 2) non-umbilic parameter points.
    spacing : float, optional
        Target distance between neighbouring lines of one family; enables
        gap filling.
    region : (u0, u1, v0, v1), optional
        Sub-rectangle to cover; traces stop at its boundary.
    min_angle : float
        Crossings flatter than this (radians) are rejected; the default is
        ``1 / (4 rho)`` for a target regularity ``rho = 4``.
    dedupe_tol : float, optional
        Seeds closer than this (in space) to an already traced line of the
        same family do not start a new line; the default covers the chord
        sag of the node polylines.
    """
    seeds = np.atleast_2d(np.asarray(seeds, float))
    full_chart = chart
    if region is not None:
        chart = restrict(chart, region)
    if max_length is None:
        u0, u1, v0, v1 = chart.domain
        corners = chart.position(np.array([[u0, v0], [u1, v1], [u0, v1], [u1, v0], [(u0 + u1) / 2, (v0 + v1) / 2]]))
        diam = np.max(np.linalg.norm(corners[:, None] - corners[None], axis=-1))
        max_length = 4.0 * max(diam, 1e-12)
    close = any(chart.periodic)
    X = chart.position(chart.wrap(seeds))
    if dedupe_tol is None:
        dedupe_tol = max(1e-8, cfg.sample_spacing**2 * chart.curvature_scale)
    cs = CurveSet(chart)
    for family in (1, 2):
        traced = trace_through(chart, seeds, family, cfg, max_length, close=close)
        for sd, Xs, c in zip(seeds, X, traced):
            if c is None:
                continue
            if any(o.family == family and _dist_to_curve(chart, o, Xs) < dedupe_tol for o in cs.curves):
                continue
            cs.add(c)
    if spacing is not None:
        fill_gaps(cs, spacing, cfg, max_length, region=region, close=close)
    net = build_arrangement(cs, min_angle=min_angle, meta=dict(strategy="traced", n_seeds=len(seeds)))
    net.chart = full_chart
    return net


def restrict(chart: SurfaceChart, region) -> SurfaceChart:
    """The same chart on the parameter sub-rectangle ``region``.

    A periodic axis stays periodic only if ``region`` spans a whole period.
    """
    u0, u1, v0, v1 = (float(x) for x in region)
    per = _period(chart)
    periodic = (bool(per[0]) and abs((u1 - u0) - per[0]) < 1e-12, bool(per[1]) and abs((v1 - v0) - per[1]) < 1e-12)
    return dataclasses.replace(chart, domain=(u0, u1, v0, v1), periodic=periodic)


def _dist_to_curve(chart, curve: TracedCurve, X) -> float:
    """Space distance from ``X`` to the polyline of ``curve`` (segment-wise)."""
    P = chart.position(chart.wrap(curve.uv))
    a, b = P[:-1], P[1:]
    ab = b - a
    t = np.clip(np.einsum("ij,ij->i", X - a, ab) / np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300), 0, 1)
    return float(np.min(np.linalg.norm(a + t[:, None] * ab - X, axis=-1)))
