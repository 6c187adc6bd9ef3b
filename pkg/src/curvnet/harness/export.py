"""Writers for sweep records, per-vertex estimates, check reports, OBJ and plot data.

All numbers are written with ``repr`` (shortest round-trip form), so files
are byte-identical across runs with identical inputs.  Wall times never go
into these files; :func:`write_timing` keeps them separately.  The formats
are documented column by column in ``docs/formats.md``.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..curvature import VARIANTS
from ..netgen.net import CurvatureLineNet, write_net_obj
from ..verify import CHECKS, RATIOS, SKIP_REASONS, STATUS_NAMES, BoundReport
from .pipeline import NetAnalysis

__all__ = ["RECORD_COLUMNS", "VERTEX_COLUMNS", "REPORT_COLUMNS", "write_records_csv", "write_timing",
           "write_plotdata", "write_vertex_csv", "write_report_csv", "write_net_obj", "write_stars_obj"]

RECORD_COLUMNS = (
    ["level", "valid", "n_vertices", "n_interior", "n_used", "eps_max", "rho_max", "sampling_fraction",
     "coverage_ok", "max_sample_distance"]
    + [f"sup_{k}_{v}" for v in VARIANTS for k in ("k1", "k2")]
    + ["near_eps"] + [f"near_{k}_{v}" for v in VARIANTS for k in ("k1", "k2")]
    + ["variant_diff", "variant_ratio", "umbilic_valence", "violations"]
    + [f"viol_{c}" for c in CHECKS]
    + ["note"]
)

VERTEX_COLUMNS = (
    ["vid", "u", "v", "x", "y", "z", "umbilic", "valid", "eps", "rho", "sampling_ok", "kappa1", "kappa2", "A_p",
     "K_p", "chosen_e1", "chosen_e2"]
    + [f"{q}_{v}" for v in VARIANTS for q in ("k1", "k2", "H", "area_ok")]
)

REPORT_COLUMNS = ["vid", "check", "status", "reason", "lhs", "rhs"]


def _num(x) -> str:
    """``repr`` of a float; empty for NaN / missing."""
    if x is None:
        return ""
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def _writer(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = open(path, "w", newline="", encoding="ascii")
    return fh, csv.writer(fh, lineterminator="\n")


def write_records_csv(records, path) -> Path:
    """One row per level; header only for an empty list.  Columns: :data:`RECORD_COLUMNS`."""
    fh, w = _writer(path)
    with fh:
        w.writerow(RECORD_COLUMNS)
        for r in records:
            row = [r.level, int(r.valid), r.n_vertices, r.n_interior, r.n_used, _num(r.eps_max), _num(r.rho_max),
                   _num(r.sampling_fraction), int(r.coverage_ok), _num(r.max_sample_distance)]
            row += [_num(getattr(r, "sup_" + k).get(v)) for v in VARIANTS for k in ("k1", "k2")]
            row += [_num(r.near_eps)]
            row += [_num(getattr(r, "near_" + k).get(v)) for v in VARIANTS for k in ("k1", "k2")]
            row += [_num(r.variant_diff), _num(r.variant_ratio), r.umbilic_valence, r.total_violations]
            row += [r.violations.get(c, 0) for c in CHECKS]
            row.append(r.note)
            w.writerow(row)
    return Path(path)


def write_timing(records, path) -> Path:
    """``level,wall_time_s`` rows (kept apart from the deterministic CSVs)."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["level", "wall_time_s"])
        for r in records:
            w.writerow([r.level, f"{r.wall_time:.3f}"])
    return Path(path)


def write_plotdata(records, path, variant: str = "sin", which: str = "max", kind: str = "sup") -> Path:
    """Two whitespace-separated columns ``eps_max error`` for valid levels, after one ``#`` comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# eps_max {kind}_error_{which}_{variant}\n")
        for r in records:
            e = r.error(variant, which, kind)
            if r.valid and np.isfinite(e) and np.isfinite(r.eps_max):
                fh.write(f"{r.eps_max!r} {e!r}\n")
    return path


def write_vertex_csv(an: NetAnalysis, path) -> Path:
    """Per-vertex estimates of one net.  Columns: :data:`VERTEX_COLUMNS`."""
    net = an.net
    fh, w = _writer(path)
    with fh:
        w.writerow(VERTEX_COLUMNS)
        for i, vid in enumerate(an.vids):
            u, v = net.uv[vid]
            x, y, z = net.position[vid]
            row = [int(vid), _num(u), _num(v), _num(x), _num(y), _num(z), int(an.umbilic[i]), int(an.valid[i]),
                   _num(an.eps[i]), _num(an.rho[i]), int(an.sampling_ok[i]), _num(an.kappa1[i]), _num(an.kappa2[i]),
                   _num(an.A_p[i]), _num(an.K_p[i]), int(an.chosen[i, 0]), int(an.chosen[i, 1])]
            for var in VARIANTS:
                if var in an.k1:
                    row += [_num(an.k1[var][i]), _num(an.k2[var][i]), _num(an.H_p[var][i]), int(an.area_ok[var][i])]
                else:
                    row += ["", "", "", ""]
            w.writerow(row)
    return Path(path)


def write_report_csv(report: BoundReport, path) -> Path:
    """Long-format check report: one row per vertex and check.  Columns: :data:`REPORT_COLUMNS`."""
    fh, w = _writer(path)
    with fh:
        w.writerow(REPORT_COLUMNS)
        for name in CHECKS + RATIOS:
            r = report.results[name]
            for j, vid in enumerate(report.vids):
                w.writerow([int(vid), name, STATUS_NAMES[int(r.status[j])], SKIP_REASONS[int(r.reason[j])],
                            _num(r.lhs[j]), _num(r.rhs[j])])
    return Path(path)


def write_stars_obj(net: CurvatureLineNet, vids, path) -> Path:
    """OBJ with one group ``star_<vid>`` per vertex: the straight edges to its neighbours."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# curvnet vertex stars\n")
        for x, y, z in net.position:
            fh.write(f"v {x!r} {y!r} {z!r}\n")
        for vid in vids:
            fh.write(f"g star_{int(vid)}\n")
            for e in net.incident(int(vid)):
                fh.write(f"l {int(vid) + 1} {int(net.far_vertex(int(vid), int(e))) + 1}\n")
    return path
