"""Analytic quad nets of meridians and parallels on surfaces of revolution."""

from __future__ import annotations

import numpy as np

from ..errors import UnsupportedChartError
from ..surface import RevolutionChart, SurfaceChart, TransformedChart, principal_frames
from .net import BOUNDARY, INTERIOR, CurvatureLineNet

__all__ = ["revolution_net", "arc_length"]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def arc_length(chart: SurfaceChart, p0, p1, rtol: float = 1e-14, max_panels: int = 256) -> np.ndarray:
    """Length of the images of straight parameter segments ``p0 -> p1``.

    Composite 16-point Gauss-Legendre quadrature of ``|J (p1 - p0)|``; the
    number of panels doubles (per segment) until two successive results agree
    to ``rtol``.
    """
    p0 = np.atleast_2d(np.asarray(p0, float))
    p1 = np.atleast_2d(np.asarray(p1, float))
    d = p1 - p0

    def integrate(idx, panels):
        t = (np.arange(panels)[:, None] + 0.5 * (_GL_X[None, :] + 1.0)) / panels  # (panels, 16)
        w = np.broadcast_to(_GL_W[None, :] / (2.0 * panels), t.shape).ravel()
        t = t.ravel()
        pts = p0[idx, None, :] + t[None, :, None] * d[idx, None, :]
        P = chart.partials(pts[..., 0], pts[..., 1], order=1)
        speed = np.linalg.norm(P[1, 0] * d[idx, None, 0:1] + P[0, 1] * d[idx, None, 1:2], axis=-1)
        return speed @ w

    out = np.empty(len(p0))
    idx = np.arange(len(p0))
    prev = integrate(idx, 1)
    panels = 2
    while len(idx):
        cur = integrate(idx, panels)
        done = np.abs(cur - prev) <= rtol * np.abs(cur)
        out[idx[done]] = cur[done]
        if panels >= max_panels:
            out[idx[~done]] = cur[~done]
            break
        idx, prev = idx[~done], cur[~done]
        panels *= 2
    return out


def _is_revolution(chart: SurfaceChart) -> bool:
    """Parameter lines are curvature lines: surfaces of revolution and totally umbilic charts."""
    if chart.totally_umbilic:
        return True
    while isinstance(chart, TransformedChart):
        chart = chart.base
    return isinstance(chart, RevolutionChart)


def revolution_net(chart: SurfaceChart, n_meridians: int, n_parallels: int, samples_per_edge: int = 9,
                   urange: tuple[float, float] | None = None,
                   vrange: tuple[float, float] | None = None) -> CurvatureLineNet:
    """Quad net of meridians and parallels.

    Parameters
    ----------
    chart : RevolutionChart (possibly rigidly moved)
    n_meridians : int
        Number of meridians (distinct ``u`` values), at least 3.
    n_parallels : int
        Number of parallels (distinct ``v`` values), at least 2.
    urange, vrange : (float, float), optional
        Sub-ranges of the parameter domain to cover.  A range equal to a full
        period of a periodic axis closes up; otherwise the net has a boundary
        along that axis (end values included).

    Notes
    -----
    Every edge is a straight parameter segment, hence exactly a segment of a
    meridian or parallel, which are the curvature lines of a surface of
    revolution.  Family tags follow the principal frame at the edge midpoint.
    """
    if not _is_revolution(chart):
        raise UnsupportedChartError(f"revolution_net needs a surface of revolution or a totally umbilic chart, got {chart.kind}")
    if n_meridians < 3:
        raise ValueError("need at least 3 meridians")
    if n_parallels < 2:
        raise ValueError("need at least 2 parallels")
    u0, u1, v0, v1 = chart.domain
    ur = urange or (u0, u1)
    vr = vrange or (v0, v1)
    per_u = chart.periodic[0] and abs((ur[1] - ur[0]) - (u1 - u0)) < 1e-12
    per_v = chart.periodic[1] and abs((vr[1] - vr[0]) - (v1 - v0)) < 1e-12
    us = np.linspace(ur[0], ur[1], n_meridians, endpoint=not per_u)
    vs = np.linspace(vr[0], vr[1], n_parallels, endpoint=not per_v)
    nu, nv = len(us), len(vs)
    du = us[1] - us[0] if not per_u else (ur[1] - ur[0]) / nu
    dv = vs[1] - vs[0] if not per_v else (vr[1] - vr[0]) / nv
    I, J = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    vid = lambda i, j: (i % nu) * nv + (j % nv)
    uv = np.stack([us[I].ravel(), vs[J].ravel()], axis=-1)

    # parallel edges (along u) and meridian edges (along v)
    iu = np.arange(nu if per_u else nu - 1)
    jv = np.arange(nv if per_v else nv - 1)
    Pi, Pj = np.meshgrid(iu, np.arange(nv), indexing="ij")
    Mi, Mj = np.meshgrid(np.arange(nu), jv, indexing="ij")
    Pi, Pj, Mi, Mj = Pi.ravel(), Pj.ravel(), Mi.ravel(), Mj.ravel()
    par_edges = np.stack([vid(Pi, Pj), vid(Pi + 1, Pj)], axis=-1)
    mer_edges = np.stack([vid(Mi, Mj), vid(Mi, Mj + 1)], axis=-1)
    edges = np.concatenate([par_edges, mer_edges])
    start = np.concatenate([np.stack([us[Pi], vs[Pj]], -1), np.stack([us[Mi], vs[Mj]], -1)])
    step = np.concatenate([np.tile([du, 0.0], (len(Pi), 1)), np.tile([0.0, dv], (len(Mi), 1))])
    end = start + step
    length = arc_length(chart, start, end)

    fr = principal_frames(chart, start + 0.5 * step)
    t = fr["Xu"] * step[:, 0:1] + fr["Xv"] * step[:, 1:2]
    d1 = np.abs(np.einsum("ij,ij->i", t, fr["v1"]))
    d2 = np.abs(np.einsum("ij,ij->i", t, fr["v2"]))
    family = np.where(d2 > d1, 2, 1).astype(np.int8)

    m = samples_per_edge
    ts = np.linspace(0.0, 1.0, m)
    samples = (start[:, None, :] + ts[None, :, None] * step[:, None, :]).reshape(-1, 2)
    s_off = np.arange(len(edges) + 1, dtype=np.int64) * m

    # rotation system: east, north, west, south in parameter space
    E_par, E_mer = len(par_edges), len(mer_edges)
    par_id = -np.ones((nu, nv), dtype=np.int64)
    par_id[Pi, Pj] = np.arange(E_par)
    mer_id = -np.ones((nu, nv), dtype=np.int64)
    mer_id[Mi, Mj] = E_par + np.arange(E_mer)
    east = par_id
    west = np.roll(par_id, 1, axis=0) if per_u else np.concatenate([-np.ones((1, nv), np.int64), par_id[:-1]], 0)
    north = mer_id
    south = np.roll(mer_id, 1, axis=1) if per_v else np.concatenate([-np.ones((nu, 1), np.int64), mer_id[:, :-1]], 1)
    rot = np.stack([east, north, west, south], axis=-1).reshape(-1, 4)
    if chart.orientation < 0:
        rot = rot[:, ::-1]
    keep = rot >= 0
    adj_edges = rot[keep]
    counts = keep.sum(1)
    adj_off = np.concatenate([[0], np.cumsum(counts)])

    status = np.where(counts == 4, INTERIOR, BOUNDARY).astype(np.int8)
    ci, cj = np.meshgrid(iu, jv, indexing="ij")
    ci, cj = ci.ravel(), cj.ravel()
    quads = np.stack([vid(ci, cj), vid(ci + 1, cj), vid(ci + 1, cj + 1), vid(ci, cj + 1)], axis=-1)
    if chart.orientation < 0:
        quads = quads[:, ::-1]
    pos = chart.position(uv)
    net = CurvatureLineNet(
        chart=chart, uv=uv, position=pos, umbilic=np.zeros(len(uv), bool), status=status,
        edges=edges, family=family, length=length, sample_offsets=s_off, samples=samples,
        adj_offsets=adj_off, adj_edges=adj_edges, cells=list(quads),
        meta=dict(strategy="revolution", n_meridians=int(n_meridians), n_parallels=int(n_parallels)),
    )
    net.umbilic = principal_frames(chart, uv)["umbilic"]
    return net
