"""Refinement sweeps, sup errors by nearest-vertex extension, and rate fits."""

from __future__ import annotations

import math
import os
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from ..curvature import VARIANTS
from ..errors import CurvnetError, FitUnavailableError
from ..netgen.net import CurvatureLineNet
from ..netgen.revolution import revolution_net
from ..netgen.traced import seed_lattice, traced_net
from ..netgen.tracing import TraceConfig
from ..netgen.umbilic import umbilic_net
from ..surface import SurfaceBounds, SurfaceChart, chart_from_config, estimate_bounds, eval_points
from ..verify import CHECKS
from .config import ExperimentConfig
from .pipeline import NetAnalysis, analyze_net

__all__ = ["ConvergenceRecord", "RateFit", "UmbilicResult", "build_net", "sup_errors", "run_level",
           "run_refinement", "fit_rate", "fit_loglog", "umbilic_experiment", "near_umbilic_vertices",
           "output_dir", "NEAR_UMBILIC_COUNT"]

#: number of usable vertices (besides the umbilic vertex) in the near-umbilic error set
NEAR_UMBILIC_COUNT = 12

_CHUNK = 8192  # sample points per surface evaluation batch (bounds peak memory)


@dataclass
class ConvergenceRecord:
    """Results of one refinement level.

    Attributes
    ----------
    level : int
    valid : bool
        ``False`` when net generation failed or a chosen edge had a
        non-positive area; ``note`` says why.
    n_vertices, n_interior, n_used : int
        All vertices, interior vertices, and interior vertices usable by
        every evaluated variant.
    eps_max, rho_max : float
        Largest edge length and shape regularity over interior vertices.
    sampling_fraction : float
        Fraction of interior vertices satisfying the sampling condition.
    sup_k1, sup_k2 : dict variant -> float
        Sup errors over the dense nearest-vertex sample.
    near_k1, near_k2 : dict variant -> float
        Umbilic sweeps only: max vertex errors over the near-umbilic set.
    near_eps : float
        Umbilic sweeps only: largest ``eps`` over the near-umbilic set
        (informational; rates are fitted against ``eps_max``).
    coverage_ok : bool
        Every sample mapped to a usable vertex lies within ``eps_max`` of it
        (approximate intrinsic distance).
    max_sample_distance : float
    variant_diff : float
        Largest pairwise difference of the variants' estimates.
    violations : dict check -> int
    wall_time : float
        Seconds; kept out of the CSV (see :mod:`curvnet.harness.export`).
    """

    level: int
    valid: bool = True
    note: str = ""
    n_vertices: int = 0
    n_interior: int = 0
    n_used: int = 0
    eps_max: float = math.nan
    rho_max: float = math.nan
    sampling_fraction: float = math.nan
    sup_k1: dict = field(default_factory=dict)
    sup_k2: dict = field(default_factory=dict)
    near_k1: dict = field(default_factory=dict)
    near_k2: dict = field(default_factory=dict)
    near_eps: float = math.nan
    coverage_ok: bool = False
    max_sample_distance: float = math.nan
    variant_diff: float = math.nan
    violations: dict = field(default_factory=dict)
    umbilic_valence: int = 0
    wall_time: float = 0.0

    @property
    def total_violations(self) -> int:
        return int(sum(self.violations.values()))

    @property
    def variant_ratio(self) -> float:
        """``variant_diff / eps_max**2``."""
        return self.variant_diff / self.eps_max**2 if self.eps_max > 0 else math.nan

    def error(self, variant: str, which: str, kind: str = "sup") -> float:
        """``kind`` in ``sup | near``; ``which`` in ``k1 | k2 | max``."""
        d1, d2 = getattr(self, kind + "_k1"), getattr(self, kind + "_k2")
        if which == "k1":
            return d1.get(variant, math.nan)
        if which == "k2":
            return d2.get(variant, math.nan)
        return max(d1.get(variant, math.nan), d2.get(variant, math.nan))


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit ``log(err) = slope * log(eps) + intercept``.

    ``residual`` is the root mean square of the fit residuals; ``levels``
    lists the levels that entered the fit.
    """

    slope: float
    intercept: float
    residual: float
    levels: tuple = ()


@dataclass
class UmbilicResult:
    """Records, near-umbilic rate fits ``{(variant, "k1"|"k2"): RateFit}`` and the ``rho_max`` trajectory."""

    pattern: str
    records: list
    fits: dict
    rho_max: list

    @property
    def rho_nondecreasing(self) -> bool:
        r = [x for x in self.rho_max if np.isfinite(x)]
        return len(r) == len(self.rho_max) and all(b >= a for a, b in zip(r, r[1:]))

    @property
    def min_slope(self) -> float:
        return min(f.slope for f in self.fits.values()) if self.fits else math.nan


# ---------------------------------------------------------------- nets


def build_net(config: ExperimentConfig, chart: SurfaceChart, level: int) -> CurvatureLineNet:
    """The net of ``config.strategy`` at refinement ``level``."""
    if config.strategy == "revolution":
        u0, u1, v0, v1 = chart.domain
        ur, vr = config.urange or (u0, u1), config.vrange or (v0, v1)
        closed_u = chart.periodic[0] and abs((ur[1] - ur[0]) - (u1 - u0)) < 1e-12
        closed_v = chart.periodic[1] and abs((vr[1] - vr[0]) - (v1 - v0)) < 1e-12
        n_mer = max(3, round(config.meridian_factor * level)) + (0 if closed_u else 1)
        n_par = max(2, round(config.parallel_factor * level)) + (0 if closed_v else 1)
        return revolution_net(chart, n_mer, n_par, urange=config.urange, vrange=config.vrange)
    if config.strategy == "traced":
        spacing = config.spacing_scale / level
        step = min(1e-2, spacing / 8)
        cfg = TraceConfig(step=step, sample_spacing=step)
        seeds = seed_lattice(chart, config.seeds, config.region)
        return traced_net(chart, seeds, cfg, spacing=spacing, region=config.region)
    pattern = str(config.surface.get("pattern", "")).strip()
    return umbilic_net(chart, pattern, int(level), sectors=config.sectors)


# ---------------------------------------------------------------- sup errors


def _sample_box(net: CurvatureLineNet, chart: SurfaceChart):
    lo, hi = net.uv.min(axis=0), net.uv.max(axis=0)
    box = [lo[0], hi[0], lo[1], hi[1]]
    for ax in (0, 1):
        if chart.periodic[ax] and (hi[ax] - lo[ax]) > 0.5 * (chart.domain[2 * ax + 1] - chart.domain[2 * ax]):
            box[2 * ax], box[2 * ax + 1] = chart.domain[2 * ax], chart.domain[2 * ax + 1]
    return box


def _midline_length(chart: SurfaceChart, box, axis: int, n: int = 65) -> float:
    t = np.linspace(0.0, 1.0, n)
    uv = np.empty((n, 2))
    uv[:, axis] = box[2 * axis] + t * (box[2 * axis + 1] - box[2 * axis])
    other = 1 - axis
    uv[:, other] = 0.5 * (box[2 * other] + box[2 * other + 1])
    P = chart.position(uv)
    return float(np.linalg.norm(np.diff(P, axis=0), axis=1).sum())


def sup_errors(an: NetAnalysis, factor: int, rng: np.random.Generator, variants=None) -> dict:
    """Sup errors of the nearest-vertex extension on a dense jittered sample.

    The sample is a cell-centred grid over the parameter box of the net with
    ``factor**2`` times as many points as the net has vertices (split between
    the axes by their ambient extents), each point jittered uniformly within
    its cell.  Every sample point is mapped to its nearest vertex in space;
    points whose nearest vertex is not usable (boundary, incomplete,
    degenerate, non-positive chosen area) are excluded.  Ambient distances
    are converted to approximate intrinsic ones by the chord-to-arc factor
    ``1 + (K d)^2 / 24``.

    Returns
    -------
    dict with ``sup_k1`` and ``sup_k2`` (dicts keyed by variant),
    ``max_distance`` and ``n_samples`` (samples that entered the sup).
    """
    net, chart = an.net, an.net.chart
    variants = tuple(variants or an.k1.keys())
    box = _sample_box(net, chart)
    lu, lv = _midline_length(chart, box, 0), _midline_length(chart, box, 1)
    aspect = lu / lv if lv > 0 else 1.0
    nV = net.n_vertices
    nu = max(2, math.ceil(factor * math.sqrt(nV * aspect)))
    nv = max(2, math.ceil(factor * math.sqrt(nV / aspect)))
    du, dv = (box[1] - box[0]) / nu, (box[3] - box[2]) / nv
    U, V = np.meshgrid(box[0] + (np.arange(nu) + 0.5) * du, box[2] + (np.arange(nv) + 0.5) * dv, indexing="ij")
    uv = np.stack([U.ravel(), V.ravel()], -1)
    uv += (rng.random(uv.shape) - 0.5) * np.array([du, dv])
    uv = chart.wrap(uv)
    P = chart.position(uv)
    d, nearest = cKDTree(net.position).query(P)
    K = an.bounds.K
    d_int = d * (1.0 + (K * d) ** 2 / 24.0)

    slot = np.full(nV, -1, np.int64)
    slot[an.vids] = np.arange(len(an.vids))
    s = slot[nearest]
    out = dict(sup_k1={}, sup_k2={}, max_distance=0.0, n_samples=0)
    usable_all = np.ones(len(an.vids), bool)
    for var in variants:
        usable_all &= an.usable(var)
    live = (s >= 0)
    live[live] = usable_all[s[live]]
    if not np.any(live):
        for var in variants:
            out["sup_k1"][var] = out["sup_k2"][var] = math.nan
        return out
    uv_live, sl = uv[live], s[live]
    kap1, kap2 = np.empty(len(sl)), np.empty(len(sl))
    for a in range(0, len(sl), _CHUNK):
        pts = eval_points(chart, uv_live[a:a + _CHUNK])
        kap1[a:a + _CHUNK], kap2[a:a + _CHUNK] = pts.k1, pts.k2
    for var in variants:
        out["sup_k1"][var] = float(np.max(np.abs(an.k1[var][sl] - kap1)))
        out["sup_k2"][var] = float(np.max(np.abs(an.k2[var][sl] - kap2)))
    out["max_distance"] = float(d_int[live].max())
    out["n_samples"] = int(np.count_nonzero(live))
    return out


def _variant_diff(an: NetAnalysis, variants) -> float:
    variants = tuple(variants)
    if len(variants) < 2:
        return 0.0
    use = np.ones(len(an.vids), bool)
    for v in variants:
        use &= an.usable(v)
    if not np.any(use):
        return math.nan
    best = 0.0
    for i, a in enumerate(variants):
        for b in variants[i + 1:]:
            for k in (an.k1, an.k2):
                best = max(best, float(np.max(np.abs(k[a][use] - k[b][use]))))
    return best


def near_umbilic_vertices(an: NetAnalysis, count: int = NEAR_UMBILIC_COUNT, variants=None) -> np.ndarray:
    """Indices (into ``an.vids``) of the umbilic vertices and the ``count`` nearest usable vertices."""
    variants = tuple(variants or an.k1.keys())
    use = np.ones(len(an.vids), bool)
    for v in variants:
        use &= an.usable(v)
    umb_ids = np.nonzero(an.net.umbilic)[0]
    if len(umb_ids) == 0:
        return np.zeros(0, np.int64)
    d, _ = cKDTree(an.net.position[umb_ids]).query(an.net.position[an.vids])
    is_umb = np.isin(an.vids, umb_ids)
    others = np.nonzero(use & ~is_umb)[0]
    others = others[np.argsort(d[others], kind="stable")[:count]]
    return np.concatenate([np.nonzero(is_umb & use)[0], others])


# ---------------------------------------------------------------- sweeps


def run_level(config: ExperimentConfig, chart: SurfaceChart, bounds: SurfaceBounds, level: int,
              primary: str = "sin") -> tuple[ConvergenceRecord, NetAnalysis | None]:
    """Generate, analyse and score one level.  Failures give an invalid record and no analysis."""
    t0 = time.perf_counter()
    rec = ConvergenceRecord(level=int(level))
    try:
        net = build_net(config, chart, level)
        with np.errstate(divide="ignore", invalid="ignore"):
            an = analyze_net(net, bounds, config.variants, primary=primary)
    except CurvnetError as exc:
        rec.valid, rec.note = False, f"{type(exc).__name__}: {exc}"
        rec.wall_time = time.perf_counter() - t0
        return rec, None
    variants = config.variants
    rec.n_vertices, rec.n_interior = net.n_vertices, len(an.vids)
    use = np.ones(len(an.vids), bool)
    for v in variants:
        use &= an.usable(v)
    rec.n_used = int(np.count_nonzero(use))
    rec.eps_max, rec.rho_max = an.eps_max, an.rho_max
    rec.sampling_fraction = float(np.mean(an.sampling_ok)) if len(an.vids) else math.nan
    rec.violations = an.report.violations()
    bad_area = [v for v in variants if np.any(an.valid & ~an.area_ok[v])]
    if bad_area:
        rec.valid = False
        rec.note = "non-positive chosen area (" + ", ".join(bad_area) + ")"
    rng = np.random.default_rng([int(config.seed), int(level)])
    se = sup_errors(an, config.dense_factor, rng, variants)
    rec.sup_k1, rec.sup_k2 = se["sup_k1"], se["sup_k2"]
    rec.max_sample_distance = se["max_distance"]
    rec.coverage_ok = bool(se["n_samples"] > 0 and se["max_distance"] <= rec.eps_max)
    rec.variant_diff = _variant_diff(an, variants)
    if np.any(net.umbilic) and not chart.totally_umbilic:
        near = near_umbilic_vertices(an, variants=variants)
        for v in variants:
            e1, e2 = an.errors(v)
            rec.near_k1[v] = float(e1[near].max()) if len(near) else math.nan
            rec.near_k2[v] = float(e2[near].max()) if len(near) else math.nan
        rec.near_eps = float(an.eps[near].max()) if len(near) else math.nan
        rec.umbilic_valence = int(net.valence[np.nonzero(net.umbilic)[0][0]])
    rec.wall_time = time.perf_counter() - t0
    return rec, an


def run_refinement(config: ExperimentConfig, *, chart: SurfaceChart | None = None,
                   bounds: SurfaceBounds | None = None, primary: str = "sin", on_level=None) -> list[ConvergenceRecord]:
    """Run every level of ``config`` in order.

    A level whose net cannot be generated, or where a chosen edge has a
    non-positive area, is recorded as invalid and the sweep continues.
    ``on_level(record, analysis)`` is called after each level.
    """
    chart = chart or chart_from_config(config.surface)
    bounds = bounds or estimate_bounds(chart, 64)
    records = []
    for level in config.levels:
        rec, an = run_level(config, chart, bounds, level, primary)
        if on_level is not None:
            on_level(rec, an)
        records.append(rec)
    return records


# ---------------------------------------------------------------- rates


def fit_loglog(eps, err) -> tuple[float, float, float]:
    """Least-squares ``(slope, intercept, rms residual)`` of ``log err`` against ``log eps``.

    Examples
    --------
    >>> slope, icpt, res = fit_loglog([0.1, 0.05, 0.025], [0.02, 0.005, 0.00125])
    >>> round(slope, 12), round(float(np.exp(icpt)), 12)
    (2.0, 2.0)
    """
    x, y = np.log(np.asarray(eps, float)), np.log(np.asarray(err, float))
    A = np.stack([x, np.ones_like(x)], -1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res**2)))


def fit_rate(records, variant: str = "sin", which: str = "max", kind: str = "sup") -> RateFit:
    """Convergence rate of the ``kind`` error (``sup | near``) of ``which`` (``k1 | k2 | max``).

    Both kinds are fitted against the global ``eps_max``.  Only valid levels
    with zero bound violations enter the fit.  Exactly
    zero errors cannot be placed on a log scale; they are dropped with a
    warning.

    Raises
    ------
    FitUnavailableError
        Fewer than two usable levels remain.
    """
    pts = []
    zeros = []
    for r in records:
        if not r.valid or r.total_violations:
            continue
        e = r.error(variant, which, kind)
        eps = r.eps_max
        if not (np.isfinite(e) and np.isfinite(eps) and eps > 0):
            continue
        if e == 0.0:
            zeros.append(r.level)
            continue
        pts.append((r.level, eps, e))
    if zeros:
        warnings.warn(f"levels {zeros} have zero error and are excluded from the fit", RuntimeWarning, stacklevel=2)
    if len(pts) < 2:
        raise FitUnavailableError(f"only {len(pts)} usable level(s) for the rate fit")
    slope, icpt, res = fit_loglog([p[1] for p in pts], [p[2] for p in pts])
    return RateFit(slope, icpt, res, tuple(p[0] for p in pts))


def umbilic_experiment(pattern: str, levels=(4, 8, 16, 32), *, kappa: float = 1.0, cubic_scale: float = 1.0,
                       half_width: float = 0.2, variants=VARIANTS, dense_factor: int = 4, seed: int = 0,
                       sectors: int = 3, config: ExperimentConfig | None = None, on_level=None) -> UmbilicResult:
    """Refinement sweep of umbilic nets around a ``pattern`` umbilic.

    Errors are taken at the near-umbilic vertex set (the umbilic vertex and
    its :data:`NEAR_UMBILIC_COUNT` nearest usable vertices) and fitted against
    the global ``eps_max``; the ``rho_max`` trajectory is returned alongside.
    Levels are ring counts.  A given ``config`` (strategy ``umbilic``) takes
    precedence over the keyword arguments.
    """
    if config is None:
        surface = dict(kind="umbilic-patch", pattern=pattern, kappa=repr(kappa), cubic_scale=repr(cubic_scale),
                       half_width=repr(half_width))
        config = ExperimentConfig(surface=surface, strategy="umbilic", levels=tuple(levels),
                                  variants=tuple(variants), dense_factor=dense_factor, seed=seed, sectors=sectors,
                                  name=f"umbilic-{pattern}")
    pattern = str(config.surface.get("pattern", pattern)).strip()
    records = run_refinement(config, on_level=on_level)
    fits = {}
    for v in config.variants:
        for which in ("k1", "k2"):
            try:
                fits[v, which] = fit_rate(records, v, which, kind="near")
            except FitUnavailableError:
                pass
    return UmbilicResult(pattern, records, fits, [r.rho_max for r in records])


def output_dir(out, env_var: str = "CURVNET_OUTPUT_ROOT") -> Path:
    """Resolve an output directory; a relative path is placed under ``$CURVNET_OUTPUT_ROOT`` when set."""
    p = Path(out)
    root = os.environ.get(env_var)
    if root and not p.is_absolute():
        p = Path(root) / p
    return p
