"""Per-net analysis: stars, metrics, curvatures for all variants, and checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..curvature import VARIANTS, edge_curvatures, vertex_curvatures
from ..netgen.net import CurvatureLineNet
from ..star import build_stars, star_metrics
from ..surface import SurfaceBounds
from ..verify import BoundReport, run_checks

__all__ = ["NetAnalysis", "analyze_net"]


@dataclass
class NetAnalysis:
    """Vertex-level results of one net, concatenated over valence batches.

    All arrays are indexed like ``vids`` (interior vertices only).  ``k1``,
    ``k2``, ``H_p`` and ``area_ok`` are dicts keyed by variant name.
    """

    net: CurvatureLineNet
    bounds: SurfaceBounds
    vids: np.ndarray
    eps: np.ndarray
    rho: np.ndarray
    sampling_ok: np.ndarray
    weak_rho: np.ndarray
    weak_K: np.ndarray
    valid: np.ndarray
    umbilic: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    k1: dict
    k2: dict
    area_ok: dict
    chosen: np.ndarray
    A_p: np.ndarray
    H_p: dict
    K_p: np.ndarray
    report: BoundReport
    primary: str

    @property
    def eps_max(self) -> float:
        return float(self.eps.max()) if len(self.eps) else float("nan")

    @property
    def rho_max(self) -> float:
        return float(self.rho.max()) if len(self.rho) else float("nan")

    def usable(self, variant: str) -> np.ndarray:
        """Vertices with a nondegenerate star and a positive chosen area."""
        return self.valid & self.area_ok[variant]

    def errors(self, variant: str) -> tuple[np.ndarray, np.ndarray]:
        return np.abs(self.k1[variant] - self.kappa1), np.abs(self.k2[variant] - self.kappa2)


def analyze_net(net: CurvatureLineNet, bounds: SurfaceBounds, variants=VARIANTS, primary: str = "sin",
                vids=None) -> NetAnalysis:
    """Build stars for ``vids`` (default: interior vertices) and evaluate everything.

    Parameters
    ----------
    variants : iterable of str
        Integrated-curvature variants to evaluate.
    primary : str
        Variant used by the bound checks that involve ``k_e``.
    """
    variants = tuple(variants)
    if primary not in variants:
        variants = variants + (primary,)
    parts = []
    cols: dict[str, list] = {}

    def push(key, val):
        cols.setdefault(key, []).append(val)

    for star in build_stars(net, vids):
        met = star_metrics(star, bounds.K)
        ec = edge_curvatures(star)
        vcs = {v: vertex_curvatures(star, v, ec) for v in variants}
        res = run_checks(star, ec, vcs[primary], met, bounds, primary)
        parts.append((star.vids, res, met))
        push("vids", star.vids)
        push("eps", met.eps)
        push("rho", met.rho)
        push("sampling_ok", met.sampling_ok)
        push("weak_rho", met.weak_rho)
        push("weak_K", met.weak_K)
        push("valid", star.valid)
        push("umbilic", star.umbilic)
        push("kappa1", star.k1)
        push("kappa2", star.k2)
        push("chosen", vcs[primary].chosen)
        push("A_p", vcs[primary].A_p)
        push("K_p", vcs[primary].K_p)
        for v in variants:
            push("k1:" + v, vcs[v].k1)
            push("k2:" + v, vcs[v].k2)
            push("ok:" + v, vcs[v].area_ok)
            push("H:" + v, vcs[v].H_p)

    def cat(key, shape=(0,), dtype=float):
        return np.concatenate(cols[key]) if key in cols else np.zeros(shape, dtype)

    order = np.argsort(cat("vids", dtype=np.int64), kind="stable")

    def get(key, shape=(0,), dtype=float):
        a = cat(key, shape, dtype)
        return a[order] if len(a) else a

    report = BoundReport.merge(parts, bounds)
    if len(order):
        report.vids = report.vids[order]
        for r in report.results.values():
            r.lhs, r.rhs, r.status, r.reason = r.lhs[order], r.rhs[order], r.status[order], r.reason[order]
        report.eps, report.rho, report.phi = report.eps[order], report.rho[order], report.phi[order]
    return NetAnalysis(
        net=net, bounds=bounds, vids=get("vids", dtype=np.int64), eps=get("eps"), rho=get("rho"),
        sampling_ok=get("sampling_ok", dtype=bool), weak_rho=get("weak_rho", dtype=bool),
        weak_K=get("weak_K", dtype=bool), valid=get("valid", dtype=bool), umbilic=get("umbilic", dtype=bool),
        kappa1=get("kappa1"), kappa2=get("kappa2"),
        k1={v: get("k1:" + v) for v in variants}, k2={v: get("k2:" + v) for v in variants},
        area_ok={v: get("ok:" + v, dtype=bool) for v in variants}, chosen=get("chosen", (0, 2), np.int64),
        A_p=get("A_p"), H_p={v: get("H:" + v) for v in variants}, K_p=get("K_p"), report=report, primary=primary,
    )
