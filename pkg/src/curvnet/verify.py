"""Machine-checkable bound predicates on vertex stars.

Every check produces, per vertex, a left-hand value, a right-hand bound and a
status.  A check passes when ``lhs <= rhs * (1 + 1e-9)``.  Checks whose
constants are not explicit (the osculating-paraboloid remainder and the edge
estimate) are *recorded* as ratios; their boundedness is asserted across
refinement levels by :func:`ratio_sequence_bounded`.

Skip logic is total: a vertex is skipped with a reason code when it is on the
boundary (or incomplete), its star is degenerate, it violates the sampling
condition, it is an umbilic (for umbilic-sensitive checks) or its valence is
not four (for valence-four statements).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import EdgeCurvature, VertexCurvature
from .star import FramedEdges, StarMetrics, VertexStar, framed_edges
from .surface import SurfaceBounds, SurfaceChart, eval_point, eval_points, principal_frames, tangent_to_param

__all__ = ["PASS", "FAIL", "SKIP", "RECORD", "SKIP_REASONS", "CHECKS", "RATIOS", "CheckResult",
           "BoundReport", "run_checks", "check_area_bounds", "check_delaunay", "check_normal_angle",
           "check_gauss_bound", "check_height_and_paraboloid", "check_tangential_component",
           "check_tangent_deviation_product", "check_edge_estimate", "check_geodesic_identity",
           "ratio_sequence_bounded", "SLACK"]

SLACK = 1e-9
PASS, FAIL, SKIP, RECORD = 0, 1, 2, 3
STATUS_NAMES = {PASS: "pass", FAIL: "fail", SKIP: "skip", RECORD: "record"}
R_NONE, R_BOUNDARY, R_DEGENERATE, R_SAMPLING, R_UMBILIC, R_VALENCE = 0, 1, 2, 3, 4, 5
SKIP_REASONS = {R_NONE: "", R_BOUNDARY: "boundary", R_DEGENERATE: "degenerate star",
                R_SAMPLING: "sampling violated", R_UMBILIC: "umbilic proximity", R_VALENCE: "valence not 4"}

# pass/fail checks and recorded ratios, in report order
CHECKS = ("area_upper", "area_lower_max", "area_lower_three", "area_chosen", "delaunay_count",
          "delaunay_defect", "normal_angle", "normal_angle_abs", "projection_injective", "gauss_bound",
          "height", "tangential", "tangent_deviation")
RATIOS = ("paraboloid_ratio", "expansion_ratio", "edge_estimate_ratio", "edge_estimate_eps3")


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


@dataclass
class CheckResult:
    """One check over a batch: ``lhs``, ``rhs``, ``status`` and ``reason`` of shape ``(m,)``."""

    name: str
    lhs: np.ndarray
    rhs: np.ndarray
    status: np.ndarray
    reason: np.ndarray

    @classmethod
    def compare(cls, name, lhs, rhs, skip_reason):
        lhs = np.asarray(lhs, float)
        rhs = np.broadcast_to(np.asarray(rhs, float), lhs.shape).copy()
        ok = lhs <= rhs * (1.0 + SLACK)
        status = np.where(ok, PASS, FAIL).astype(np.int8)
        status[skip_reason != R_NONE] = SKIP
        return cls(name, lhs, rhs, status, skip_reason.astype(np.int8))

    @classmethod
    def record(cls, name, value, skip_reason):
        value = np.asarray(value, float)
        status = np.full(value.shape, RECORD, np.int8)
        status[skip_reason != R_NONE] = SKIP
        return cls(name, value, np.full(value.shape, np.nan), status, skip_reason.astype(np.int8))


@dataclass
class StarContext:
    """Everything the checks need about one star batch."""

    star: VertexStar
    ec: EdgeCurvature
    vc: VertexCurvature
    metrics: StarMetrics
    K: float
    Kp: float
    framed: FramedEdges = None
    phi: np.ndarray = None

    def __post_init__(self):
        if self.framed is None:
            self.framed = framed_edges(self.star)
        if self.phi is None:
            tri_n = np.cross(self.star.E, self.star.F)
            tri_n /= np.linalg.norm(tri_n, axis=-1, keepdims=True)
            n = self.star.n[:, None, :]
            self.phi = np.arctan2(np.linalg.norm(np.cross(n, tri_n), axis=-1), _dot(n, tri_n)).max(axis=1)

    @property
    def base_skip(self) -> np.ndarray:
        r = np.full(self.star.m, R_NONE, np.int8)
        r[~self.metrics.sampling_ok] = R_SAMPLING
        r[~self.star.valid] = R_DEGENERATE
        r[self.star.boundary] = R_BOUNDARY
        return r


def _valence4_skip(ctx: StarContext) -> np.ndarray:
    r = ctx.base_skip.copy()
    if ctx.star.k != 4:
        r[r == R_NONE] = R_VALENCE
    return r


def check_area_bounds(ctx: StarContext) -> list[CheckResult]:
    """Upper bound, lower bounds and the chosen-edge sandwich for ``A_e``."""
    eps, rho, A = ctx.metrics.eps, ctx.metrics.rho, ctx.ec.A
    skip = ctx.base_skip
    eps2 = eps**2
    out = [CheckResult.compare("area_upper", A.max(1), rho**4 * eps2, skip),
           CheckResult.compare("area_lower_max", eps2 / (4 * rho**3), A.max(1), skip)]
    count = (A >= (eps2 / (16 * rho**4))[:, None] * (1 - SLACK)).sum(1)
    out.append(CheckResult.compare("area_lower_three", np.full(ctx.star.m, 3.0), count, _valence4_skip(ctx)))
    C = 16 * rho**4
    pos = ctx.vc.chosen_pos
    rows = np.arange(ctx.star.m)[:, None]
    Ac = np.where(pos >= 0, A[rows, np.maximum(pos, 0)], np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        worst = np.maximum(eps2[:, None] / (C[:, None] * Ac), Ac / (C[:, None] * eps2[:, None]))
    worst = np.where(Ac > 0, worst, np.inf).max(1)
    out.append(CheckResult.compare("area_chosen", worst, 1.0, skip))
    return out


def check_delaunay(ctx: StarContext) -> list[CheckResult]:
    """At least three delta-Delaunay edges (delta = 1/(2 rho^2)) and ``K_p < 2 delta``."""
    delta = 1.0 / (2 * ctx.metrics.rho**2)
    a, b = ctx.ec.alpha, ctx.ec.beta
    d = delta[:, None] * (1 - SLACK)
    good = (a >= d) & (b >= d) & (a + b <= math.pi - d)
    skip = _valence4_skip(ctx)
    return [CheckResult.compare("delaunay_count", np.full(ctx.star.m, 3.0), good.sum(1), skip),
            CheckResult.compare("delaunay_defect", ctx.vc.K_p, 2 * delta, skip)]


def check_normal_angle(ctx: StarContext) -> list[CheckResult]:
    """``sin(phi) <= (4 rho + 2) K eps``, ``sin(phi) <= 3/8`` and injective projection."""
    skip = ctx.base_skip
    s = np.sin(ctx.phi)
    star = ctx.star
    # project to the tangent plane and measure signed projected fan triangles
    P = star.E - _dot(star.E, star.n[:, None])[..., None] * star.n[:, None, :]
    x, y = _dot(P, star.v1[:, None]), _dot(P, star.v2[:, None])
    xf, yf = np.roll(x, -1, 1), np.roll(y, -1, 1)
    cross = x * yf - y * xf
    turn = np.arctan2(cross, x * xf + y * yf).sum(1)
    bad = (cross <= 0).sum(1) + (np.abs(turn - 2 * math.pi) > 1e-9)
    return [CheckResult.compare("normal_angle", s, (4 * ctx.metrics.rho + 2) * ctx.K * ctx.metrics.eps, skip),
            CheckResult.compare("normal_angle_abs", s, 3.0 / 8.0, skip),
            CheckResult.compare("projection_injective", bad.astype(float), 0.0, skip)]


def check_gauss_bound(ctx: StarContext) -> list[CheckResult]:
    """Angle defect ``K_p <= 2 pi (1 - cos phi)``."""
    return [CheckResult.compare("gauss_bound", ctx.vc.K_p, 2 * math.pi * (1 - np.cos(ctx.phi)), ctx.base_skip)]


def check_height_and_paraboloid(ctx: StarContext) -> list[CheckResult]:
    """``|e_n| <= K |e|^2`` plus the recorded paraboloid remainders over ``eps^3``."""
    fe, star = ctx.framed, ctx.star
    le2 = (star.E**2).sum(-1)
    skip = ctx.base_skip
    k1, k2 = star.k1[:, None], star.k2[:, None]
    eps3 = ctx.metrics.eps[:, None] ** 3
    P = 0.5 * k1 * fe.x**2 + 0.5 * k2 * fe.y**2
    expansion = 0.5 * k1 * le2 + 0.5 * (k2 - k1) * fe.y**2
    rec_skip = np.where(star.boundary | ~star.valid, R_BOUNDARY, R_NONE).astype(np.int8)
    return [CheckResult.compare("height", (np.abs(fe.n) / le2).max(1), ctx.K, skip),
            CheckResult.record("paraboloid_ratio", (np.abs(fe.n - P) / eps3).max(1), rec_skip),
            CheckResult.record("expansion_ratio", (np.abs(fe.n - expansion) / eps3).max(1), rec_skip)]


def check_tangential_component(ctx: StarContext) -> list[CheckResult]:
    """Tangent-plane part of the curvature vector: ``|k_t| <= 10 K^2 rho^2 eps^3``."""
    kv = ctx.ec.kvec
    n = ctx.star.n[:, None, :]
    kt = kv - _dot(kv, n)[..., None] * n
    lhs = np.linalg.norm(kt, axis=-1).max(1)
    rhs = 10 * ctx.K**2 * ctx.metrics.rho**2 * ctx.metrics.eps**3
    return [CheckResult.compare("tangential", lhs, rhs, ctx.base_skip)]


def check_tangent_deviation_product(ctx: StarContext) -> list[CheckResult]:
    """``|dk * e_d| <= (K^2 + 4 K') eps^2`` at non-umbilic vertices."""
    dk = (ctx.star.k2 - ctx.star.k1)[:, None]
    lhs = np.abs(dk * ctx.framed.d).max(1)
    rhs = (ctx.K**2 + 4 * ctx.Kp) * ctx.metrics.eps**2
    skip = ctx.base_skip.copy()
    skip[(skip == R_NONE) & ctx.star.umbilic] = R_UMBILIC
    return [CheckResult.compare("tangent_deviation", lhs, rhs, skip)]


def check_edge_estimate(ctx: StarContext, variant: str = "sin") -> list[CheckResult]:
    """Recorded ratios of ``|k_e - 2 A_e kappa|`` for every edge.

    ``kappa`` is the curvature orthogonal to the edge's associated direction
    (``k2`` for family-1 edges, ``k1`` for family-2 edges).  Two ratios are
    recorded: against ``|dk (e_d + f_d + g_d)| eps + eps^3`` and against
    ``eps^3``.
    """
    star, ec, fe = ctx.star, ctx.ec, ctx.framed
    kappa = np.where(star.family == 1, star.k2[:, None], star.k1[:, None])
    diff = np.abs(ec.k(variant) - 2 * ec.A * kappa)
    eps = ctx.metrics.eps[:, None]
    dsum = fe.d + np.roll(fe.d, -1, 1) + np.roll(fe.d, 1, 1)
    denom = np.abs((star.k2 - star.k1)[:, None] * dsum) * eps + eps**3
    rec_skip = ctx.base_skip
    return [CheckResult.record("edge_estimate_ratio", (diff / denom).max(1), rec_skip),
            CheckResult.record("edge_estimate_eps3", (diff / eps**3).max(1), rec_skip)]


def run_checks(star: VertexStar, ec: EdgeCurvature, vc: VertexCurvature, metrics: StarMetrics,
               bounds: SurfaceBounds, variant: str = "sin") -> dict[str, CheckResult]:
    """Run every star-level check on a batch; returns ``{name: CheckResult}``."""
    ctx = StarContext(star, ec, vc, metrics, bounds.K, bounds.Kp)
    results = []
    for fn in (check_area_bounds, check_delaunay, check_normal_angle, check_gauss_bound,
               check_height_and_paraboloid, check_tangential_component, check_tangent_deviation_product):
        results.extend(fn(ctx))
    results.extend(check_edge_estimate(ctx, variant))
    out = {r.name: r for r in results}
    out["_phi"] = ctx.phi  # kept for reports
    return out


@dataclass
class BoundReport:
    """Per-vertex check results of a whole net plus aggregates.

    Attributes
    ----------
    vids : (N,) vertex ids
    results : dict of name -> CheckResult (concatenated over batches)
    eps, rho, phi, delta : (N,) per-vertex inputs
    K, Kp : global bounds
    """

    vids: np.ndarray
    results: dict
    eps: np.ndarray
    rho: np.ndarray
    phi: np.ndarray
    K: float
    Kp: float

    @classmethod
    def merge(cls, parts: list[tuple[np.ndarray, dict, StarMetrics]], bounds: SurfaceBounds) -> "BoundReport":
        names = CHECKS + RATIOS
        if not parts:
            empty = np.zeros(0)
            res = {n: CheckResult(n, empty, empty, np.zeros(0, np.int8), np.zeros(0, np.int8)) for n in names}
            return cls(np.zeros(0, np.int64), res, empty, empty, empty, bounds.K, bounds.Kp)
        res = {}
        for n in names:
            rs = [p[1][n] for p in parts]
            res[n] = CheckResult(n, *(np.concatenate([getattr(r, f) for r in rs]) for f in ("lhs", "rhs", "status", "reason")))
        return cls(
            vids=np.concatenate([p[0] for p in parts]), results=res,
            eps=np.concatenate([p[2].eps for p in parts]), rho=np.concatenate([p[2].rho for p in parts]),
            phi=np.concatenate([p[1]["_phi"] for p in parts]), K=bounds.K, Kp=bounds.Kp,
        )

    @property
    def delta(self) -> np.ndarray:
        return 1.0 / (2 * self.rho**2)

    def counts(self) -> dict[str, dict[str, int]]:
        """``{check: {"pass": n, "fail": n, "skip": n, "record": n}}``."""
        return {n: {STATUS_NAMES[s]: int(np.count_nonzero(r.status == s)) for s in STATUS_NAMES}
                for n, r in self.results.items()}

    def violations(self) -> dict[str, int]:
        return {n: int(np.count_nonzero(self.results[n].status == FAIL)) for n in CHECKS}

    def worst_ratio(self, name: str) -> float:
        """Largest ``lhs/rhs`` among evaluated vertices (or largest recorded value)."""
        r = self.results[name]
        live = (r.status == PASS) | (r.status == FAIL) | (r.status == RECORD)
        if not np.any(live):
            return float("nan")
        if name in RATIOS:
            return float(np.max(r.lhs[live]))
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(r.rhs[live] != 0, r.lhs[live] / r.rhs[live], np.where(r.lhs[live] > 0, np.inf, 0.0))
        return float(np.max(q))

    def summary(self) -> str:
        lines = [f"{'check':<22}{'pass':>8}{'fail':>8}{'skip':>8}{'record':>8}   worst"]
        for n, c in self.counts().items():
            lines.append(f"{n:<22}{c['pass']:>8}{c['fail']:>8}{c['skip']:>8}{c['record']:>8}   {self.worst_ratio(n):.6g}")
        return "\n".join(lines)


# ------------------------------------------------------------ pointwise checks


def check_geodesic_identity(chart: SurfaceChart, uv, Kp: float | None = None, h: float = 1e-4) -> dict:
    """Compare the geodesic curvature of the ``v1`` line with ``nabla_v2 k1 / (k1 - k2)``.

    The left side comes from the closed-form chart machinery; the right side
    differentiates ``k1`` by central differences with intrinsic step ``h``
    along ``v2``.

    Returns
    -------
    dict with ``status`` (``"pass" | "fail" | "skip"``), ``reason``, ``kg``,
    ``fd`` (the finite-difference quotient), ``rel_err`` and, when ``Kp`` is
    given, ``bound_ok`` for ``|kg| <= K' / |k1 - k2| (1 + 1e-3)``.
    """
    p = eval_point(chart, uv)
    K = chart.curvature_scale
    if p.umbilic or abs(p.dk) <= 1e-6 * K:
        return dict(status="skip", reason=SKIP_REASONS[R_UMBILIC], kg=float("nan"), fd=float("nan"), rel_err=float("nan"))
    uv = np.asarray(uv, float).reshape(1, 2)
    fr = principal_frames(chart, uv)
    a2 = tangent_to_param(fr, p.v2[None])[0]
    q = eval_points(chart, np.stack([uv[0] + h * a2, uv[0] - h * a2]))
    grad = (q.k1[0] - q.k1[1]) / (2 * h)
    fd = grad / (p.k1 - p.k2)
    rel = abs(p.kg1 - fd) / max(abs(p.kg1), 1e-6)
    out = dict(status="pass" if rel <= 1e-3 else "fail", reason="", kg=float(p.kg1), fd=float(fd), rel_err=float(rel))
    if Kp is not None:
        out["bound_ok"] = bool(abs(p.kg1) <= Kp / abs(p.k1 - p.k2) * (1 + 1e-3))
        if not out["bound_ok"]:
            out["status"] = "fail"
    return out


def ratio_sequence_bounded(values, growth: float = 1.5, cap: float | None = None) -> bool:
    """True when every level's value is at most ``growth`` times the previous one
    or below ``cap`` (defaults to the first finite value, the coarsest level)."""
    vals = [float(v) for v in values if np.isfinite(v)]
    if len(vals) < 2:
        return True
    cap = vals[0] if cap is None else cap
    return all(b <= growth * a or b <= cap for a, b in zip(vals, vals[1:]))
