"""Umbilic patches, their classification, and nets of curvature lines around them.

The three generic umbilic patterns are realized on Monge patches

    z = (kappa/2) (x^2 + y^2) + s (x^3 + b x y^2)

with ``b = 1/2`` (lemon), ``b = -3`` (star) and ``b = 2`` (monstar).  The
pattern of a patch is read off an angular scan of the principal direction
field on a small circle around the umbilic: the index of the line field and
the number of radial directions (separatrices) of each family.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from ..errors import NetConstructionError, PatternValidationError
from ..surface import MongeChart, SurfaceChart, principal_frames
from .net import CurvatureLineNet
from .traced import CurveSet, _uncrowded, build_arrangement, fill_gaps, trace_through
from .tracing import TraceConfig, TracedCurve, trace_batch

__all__ = ["PATTERNS", "umbilic_patch", "classify_umbilic", "separatrix_directions", "filler_directions",
           "umbilic_net"]

PATTERNS = {"lemon": 0.5, "star": -3.0, "monstar": 2.0}


def umbilic_patch(pattern: str, kappa: float = 1.0, cubic_scale: float = 1.0, half_width: float = 0.2) -> MongeChart:
    """Monge patch with a single umbilic of the given pattern at the origin.

    The default ``half_width`` keeps the nearest other umbilic of the lemon
    and monstar patches (distance about ``0.28 / kappa`` for the monstar)
    outside the patch.

    Examples
    --------
    >>> classify_umbilic(umbilic_patch("star"))["pattern"]
    'star'
    """
    if pattern not in PATTERNS:
        raise ValueError(f"unknown pattern '{pattern}' (expected one of {sorted(PATTERNS)})")
    b = PATTERNS[pattern]
    coeffs = {(2, 0): 0.5 * kappa, (0, 2): 0.5 * kappa, (3, 0): cubic_scale, (1, 2): b * cubic_scale}
    w = float(half_width)
    return MongeChart(domain=(-w, w, -w, w), coeffs=tuple(sorted((k, float(v)) for k, v in coeffs.items() if v)),
                      name=f"{pattern}-patch", umbilics=((0.0, 0.0),))


def _radial_defect(chart: SurfaceChart, center, r, phi, family: int):
    """``sin(2 (angle(v_family) - phi))`` and ``cos(...)`` on the circle of radius ``r``."""
    phi = np.asarray(phi, float)
    uv = np.asarray(center, float) + r * np.stack([np.cos(phi), np.sin(phi)], -1)
    fr = principal_frames(chart, uv.reshape(-1, 2))
    v = fr["v1" if family == 1 else "v2"]
    a = _param_angle(fr, v)
    return np.sin(2 * (a - phi.ravel())), np.cos(2 * (a - phi.ravel())), a


def _param_angle(fr, v):
    Xu, Xv, E, F, G, det = (fr[k] for k in ("Xu", "Xv", "E", "F", "G", "det"))
    bu, bv = np.einsum("ij,ij->i", Xu, v), np.einsum("ij,ij->i", Xv, v)
    return np.arctan2((E * bv - F * bu) / det, (G * bu - F * bv) / det)


def separatrix_directions(chart: SurfaceChart, center=(0.0, 0.0), radius: float | None = None,
                          n_scan: int = 3600) -> dict:
    """Angles (parameter plane) at which the line field of each family is radial.

    Brute-force scan on a circle of ``radius`` around ``center`` followed by
    root refinement.  Returns ``{1: angles, 2: angles, "index": index}``.
    """
    if radius is None:
        w = min(chart.domain[1] - chart.domain[0], chart.domain[3] - chart.domain[2])
        radius = 1e-4 * w
    phi = np.linspace(0.0, 2 * np.pi, n_scan, endpoint=False)
    out = {}
    for family in (1, 2):
        s, c, a = _radial_defect(chart, center, radius, phi, family)
        roots = []
        s_next = np.roll(s, -1)
        for k in np.nonzero((np.sign(s) != np.sign(s_next)) | (s == 0))[0]:
            lo, hi = phi[k], phi[k] + 2 * np.pi / n_scan
            if not (c[k] > 0 or c[(k + 1) % n_scan] > 0):
                continue  # radial direction of the other family
            f = lambda t: _radial_defect(chart, center, radius, np.array([t]), family)[0][0]
            if s[k] == 0:
                root = lo
            else:
                flo, fhi = f(lo), f(hi)
                if flo == 0 or fhi == 0 or np.sign(flo) == np.sign(fhi):
                    root = lo if abs(flo) <= abs(fhi) else hi
                else:
                    root = brentq(f, lo, hi, xtol=1e-14)
            if _radial_defect(chart, center, radius, np.array([root]), family)[1][0] > 0:
                roots.append(root % (2 * np.pi))
        roots = np.sort(np.asarray(roots))
        if len(roots) > 1:
            gap = np.diff(np.concatenate([roots, roots[:1] + 2 * np.pi]))
            roots = roots[gap > 1e-9]
        out[family] = roots
        if family == 1:
            wind = np.unwrap(2 * a)
            total = wind[-1] - wind[0] + ((2 * a[0] - wind[-1] + np.pi) % (2 * np.pi) - np.pi)
            out["index"] = round(float(total / (4 * np.pi)) * 2) / 2
    return out


def classify_umbilic(chart: SurfaceChart, center=(0.0, 0.0), radius: float | None = None) -> dict:
    """Pattern of the umbilic at ``center``: ``lemon``, ``star``, ``monstar`` or ``unknown``.

    Returns a dict with ``pattern``, ``index`` and the separatrix angles per family.
    """
    sep = separatrix_directions(chart, center, radius)
    n1, n2, idx = len(sep[1]), len(sep[2]), sep["index"]
    if idx == -0.5 and n1 == 3 and n2 == 3:
        pattern = "star"
    elif idx == 0.5 and n1 == 1 and n2 == 1:
        pattern = "lemon"
    elif idx == 0.5 and n1 == 3 and n2 == 3:
        pattern = "monstar"
    else:
        pattern = "unknown"
    return dict(pattern=pattern, index=idx, separatrices={1: sep[1], 2: sep[2]})


def filler_directions(angles, sectors: int = 3, max_gap: float = 2 * math.pi / 3) -> list[float]:
    """Directions that bisect the widest gaps until there are ``sectors`` rays and no gap exceeds ``max_gap``.

    Input angles are reduced modulo 2*pi and coincident ones are merged.
    """
    rays: list[float] = []
    for a in sorted(float(a) % (2 * math.pi) for a in angles):
        if not rays or a - rays[-1] > 1e-12:
            rays.append(a)
    if len(rays) > 1 and rays[0] + 2 * math.pi - rays[-1] <= 1e-12:
        rays.pop()
    fill: list[float] = []
    while True:
        allr = sorted(rays + fill)
        if not allr:
            allr = [0.0]
            fill.append(0.0)
            continue
        if len(allr) == 1:
            gaps = [2 * math.pi]
        else:
            gaps = [(allr[(k + 1) % len(allr)] - allr[k]) % (2 * math.pi) for k in range(len(allr))]
        k = int(np.argmax(gaps))
        if len(allr) >= sectors and gaps[k] <= max_gap + 1e-12:
            return fill
        fill.append((allr[k] + 0.5 * gaps[k]) % (2 * math.pi))


def _ray(chart: SurfaceChart, family: int, angle: float, r0: float, length: float, cfg: TraceConfig) -> TracedCurve:
    """Curvature line leaving the umbilic at the origin in direction ``angle``."""
    d = np.array([math.cos(angle), math.sin(angle)])
    p0 = r0 * d
    fr = principal_frames(chart, p0[None])
    ref = fr["Xu"] * d[0] + fr["Xv"] * d[1]
    c = trace_batch(chart, p0[None], family, ref, length, cfg, stop_points=np.zeros((0, 3)),
                    raise_on_umbilic_seed=False)[0]
    f0 = principal_frames(chart, np.zeros((1, 2)))
    speed = float(np.linalg.norm(f0["Xu"][0] * d[0] + f0["Xv"][0] * d[1]))
    s0 = r0 * speed
    uv = np.concatenate([np.zeros((1, 2)), c.uv])
    s = np.concatenate([[0.0], c.s + s0])
    a = np.concatenate([d[None] / speed, c.a])
    return TracedCurve(family, uv, s, a, c.status, False, dict(ray_angle=angle))


def umbilic_net(patch: SurfaceChart, pattern: str, rings: int, sectors: int = 3,
                cfg: TraceConfig | None = None) -> CurvatureLineNet:
    """Net of curvature lines around the umbilic of ``patch`` at the origin.

    Parameters
    ----------
    patch : Monge chart with an umbilic of ``pattern`` at the origin.
    pattern : ``lemon | star | monstar``
    rings : int
        Number of lines of each family crossing a separatrix within the patch
        half-width ``W``; the line spacing is ``h = W / rings``.
    sectors : int
        Minimum valence of the umbilic vertex.

    Notes
    -----
    Construction (a documented heuristic):

    1. separatrices are found by an angular scan and traced outward from the
       umbilic; they are the edges at the umbilic vertex;
    2. lines of the other family are seeded along every separatrix at arc
       lengths ``h, 2h, ...``; each is cut back to the stretch around its
       seed that stays at least ``h/2`` from earlier seeded lines of its
       family (and dropped if that stretch is shorter than ``h``); lines may
       approach the separatrices themselves, which is where the shape
       regularity of the net degrades;
    3. remaining gaps wider than ``2h`` are filled with further lines, each
       cut back where it comes within ``h/2`` of an existing line of its
       family;
    4. if the separatrices leave fewer than ``sectors`` edges or an angular
       gap above 120 degrees at the umbilic, straight filler edges join the
       umbilic to the nearest net vertex in the bisecting direction.  Such a
       vertex gets valence 5 and is marked incomplete.

    Raises
    ------
    PatternValidationError
        If the patch's umbilic is not of the requested pattern.
    NetConstructionError
        If a separatrix cannot be traced away from the umbilic.
    ValueError
        If ``rings < 2``.
    """
    if rings < 2:
        raise ValueError("rings must be at least 2")
    info = classify_umbilic(patch)
    if info["pattern"] != pattern:
        raise PatternValidationError(f"patch umbilic is '{info['pattern']}', not '{pattern}'")
    u0, u1, v0, v1 = patch.domain
    W = 0.5 * min(u1 - u0, v1 - v0)
    h = W / rings
    if cfg is None:
        cfg = TraceConfig(step=h / 8, sample_spacing=h / 8, umbilic_stop=1e-3 * W)
    max_len = 8.0 * W
    # rays start a fixed fraction of the patch away from the umbilic: close
    # enough for the straight first segment to be exact to rounding, far
    # enough that the principal directions there are well defined
    r0 = 1e-6 * W
    cs = CurveSet(patch, umbilic_uv=np.zeros((1, 2)))
    rays = []
    for family in (1, 2):
        for ang in info["separatrices"][family]:
            c = _ray(patch, family, float(ang), r0, max_len, cfg)
            if c.status_name == "failed" or c.length <= r0:
                raise NetConstructionError(f"separatrix ray at {math.degrees(ang):.2f} deg (family {family}) "
                                           "could not be traced")
            cs.add(c, start=0)
            rays.append(c)
    # lines of the other family seeded along each separatrix
    seeds, fams = [], []
    for c in rays:
        ks = np.arange(1, int(c.length / h) + 1)
        if len(ks) == 0:
            continue
        pts, _ = c.at(ks * h)
        seeds.append(pts)
        fams.append(np.full(len(ks), 3 - c.family))
    if seeds:
        seeds = np.concatenate(seeds)
        fams = np.concatenate(fams)
        order = np.lexsort((np.linalg.norm(seeds, axis=-1), fams))
        seeds, fams = seeds[order], fams[order]
        traced = trace_through(patch, seeds, fams, cfg, max_len)
        for c in traced:
            if c is None:
                continue
            # separatrices are exempt: lines of hyperbolic sectors hug them
            pts = cs.family_points(c.family, ordinary_only=True)
            c = _uncrowded(patch, c, cKDTree(pts) if len(pts) else None, 0.5 * h, h)
            if c is not None:
                cs.add(c)
    fill_gaps(cs, h, cfg, max_len, keep_out=np.zeros((1, 2)), keep_out_radius=h)
    all_angles = [float(a) for f in (1, 2) for a in info["separatrices"][f]]
    fill = filler_directions(all_angles, sectors)
    net = build_arrangement(cs, min_angle=0.0, fillers=[(0, a) for a in fill], exclude_radius=1e-3 * h,
                            meta=dict(strategy="umbilic", pattern=pattern, rings=int(rings), spacing=h,
                                      separatrices=len(all_angles), fillers=len(fill)))
    net.meta["umbilic_valence"] = int(net.valence[0])
    return net
