"""Command line interface: ``curvnet <command> [options]``.

Commands
--------
generate   build the nets of every level; writes ``net_L.txt`` and ``net_L.obj``
curvature  per-vertex estimates; writes ``vertices_L.csv``
verify     bound checks; writes ``report_L.csv``
converge   refinement sweep with sup errors and rate fits; writes
           ``records.csv``, ``fits.csv``, ``plotdata_<variant>.txt`` (and
           ``timing.csv`` with ``--timing``)
umbilic    sweep around a lemon / star / monstar umbilic; same files as converge
export     ``--format csv|obj|plotdata`` for one level (default: the finest)

Every command takes ``--config``, ``--variant``, ``--levels``, ``--out`` and
``--seed``.  Relative output directories are placed under
``$CURVNET_OUTPUT_ROOT`` when that variable is set.  The exit status is 0
only when the command's assertions hold (see ``README.md``); 2 signals a
usage, configuration or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from pathlib import Path

import numpy as np

from .curvature import VARIANTS
from .errors import ConfigError, CurvnetError, FitUnavailableError
from .harness.config import ExperimentConfig, load_config
from .harness.experiments import (build_net, fit_rate, output_dir, run_level, run_refinement,
                                  umbilic_experiment)
from .harness.export import (write_plotdata, write_records_csv, write_report_csv, write_stars_obj,
                             write_timing, write_vertex_csv)
from .netgen.net import write_net, write_net_obj
from .netgen.umbilic import PATTERNS
from .surface import chart_from_config, estimate_bounds

SLOPE_RANGE = (0.8, 2.2)
UMBILIC_MIN_SLOPE = 0.8
UMBILIC_LEVELS = (4, 8, 16, 32)


def _levels(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"levels must be integers, got '{text}'") from exc


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="experiment configuration file (key = value lines)")
    p.add_argument("--variant", choices=VARIANTS, help="evaluate only this integrated-curvature variant")
    p.add_argument("--levels", type=_levels, help="refinement levels, e.g. 8,16,32")
    p.add_argument("--out", help="output directory (relative paths go under $CURVNET_OUTPUT_ROOT)")
    p.add_argument("--seed", type=int, help="seed of the sup-error sample jitter")
    return p


def _timing(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
    p.add_argument("--timing", action="store_true",
                   help="also write timing.csv with per-level wall times (not reproducible)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvnet", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    sub.add_parser("generate", parents=[common], help="build and store the nets")
    sub.add_parser("curvature", parents=[common], help="per-vertex principal curvature estimates")
    sub.add_parser("verify", parents=[common], help="run the bound checks")
    _timing(sub.add_parser("converge", parents=[common], help="refinement sweep and rate fit"))
    um = _timing(sub.add_parser("umbilic", parents=[common], help="refinement sweep around an umbilic"))
    um.add_argument("--pattern", choices=sorted(PATTERNS), help="umbilic pattern (overrides the config)")
    ex = sub.add_parser("export", parents=[common], help="export one level")
    ex.add_argument("--format", action="append", choices=("csv", "obj", "plotdata"), required=True,
                    help="output format (repeatable)")
    ex.add_argument("--level", type=int, help="level to export (default: the finest)")
    return parser


def _config(args) -> ExperimentConfig:
    if args.config is None:
        if args.command == "umbilic":
            pattern = args.pattern or "lemon"
            return ExperimentConfig(surface=dict(kind="umbilic-patch", pattern=pattern), strategy="umbilic",
                                    levels=UMBILIC_LEVELS, out=f"umbilic-{pattern}", name=f"umbilic-{pattern}")
        raise ConfigError("--config is required for this command")
    cfg = load_config(args.config)
    if args.command == "umbilic" and args.pattern:
        cfg = cfg.with_overrides(surface=dict(cfg.surface, pattern=args.pattern))
    return cfg


def _prepare(args):
    cfg = _config(args)
    cfg = cfg.with_overrides(levels=args.levels, seed=args.seed,
                             variants=(args.variant,) if args.variant else None, out=args.out)
    out = output_dir(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def _primary(cfg: ExperimentConfig) -> str:
    return "sin" if "sin" in cfg.variants else cfg.variants[0]


def _print_record(r) -> None:
    errs = " ".join(f"{v}:{r.error(v, 'k1'):.3e}/{r.error(v, 'k2'):.3e}" for v in r.sup_k1)
    state = "ok" if r.valid else f"INVALID ({r.note})"
    print(f"level {r.level:>4}  eps {r.eps_max:.4e}  rho {r.rho_max:.3f}  sup|k1-K1|/|k2-K2| {errs}  "
          f"violations {r.total_violations}  {state}", flush=True)


def _write_fits(records, cfg, path, kind="sup") -> list[tuple]:
    rows = []
    for v in cfg.variants:
        for which in ("k1", "k2"):
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    f = fit_rate(records, v, which, kind)
                rows.append((v, which, f.slope, f.intercept, f.residual, " ".join(map(str, f.levels))))
            except FitUnavailableError:
                rows.append((v, which, float("nan"), float("nan"), float("nan"), ""))
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant", "which", "slope", "intercept", "residual", "levels"])
        for row in rows:
            w.writerow([row[0], row[1], *("" if np.isnan(x) else repr(x) for x in row[2:5]), row[5]])
    return rows


def cmd_generate(args) -> int:
    cfg, out = _prepare(args)
    chart = chart_from_config(cfg.surface)
    ok = True
    for L in cfg.levels:
        try:
            net = build_net(cfg, chart, L)
        except CurvnetError as exc:
            print(f"level {L}: generation failed: {exc}")
            ok = False
            continue
        problems = net.check_invariants()
        write_net(net, out / f"net_{L}.txt")
        write_net_obj(net, out / f"net_{L}.obj")
        print(f"level {L}: {net.n_vertices} vertices, {net.n_edges} edges, invariants "
              + ("ok" if not problems else "FAILED: " + "; ".join(problems[:5])))
        ok &= not problems
    return 0 if ok else 1


def _per_level(args, writer) -> tuple[int, list]:
    cfg, out = _prepare(args)
    chart = chart_from_config(cfg.surface)
    bounds = estimate_bounds(chart, 64)
    ok, records = True, []
    for L in cfg.levels:
        rec, an = run_level(cfg, chart, bounds, L, _primary(cfg))
        records.append(rec)
        _print_record(rec)
        if an is None:
            ok = False
            continue
        ok &= writer(rec, an, out, L)
    return (0 if ok else 1), records


def cmd_curvature(args) -> int:
    def writer(rec, an, out, L):
        write_vertex_csv(an, out / f"vertices_{L}.csv")
        return rec.valid and rec.n_used > 0
    return _per_level(args, writer)[0]


def cmd_verify(args) -> int:
    def writer(rec, an, out, L):
        write_report_csv(an.report, out / f"report_{L}.csv")
        print(an.report.summary())
        return rec.total_violations == 0
    return _per_level(args, writer)[0]


def cmd_converge(args) -> int:
    cfg, out = _prepare(args)
    records = run_refinement(cfg, primary=_primary(cfg), on_level=lambda r, a: _print_record(r))
    write_records_csv(records, out / "records.csv")
    if args.timing:
        write_timing(records, out / "timing.csv")
    for v in cfg.variants:
        write_plotdata(records, out / f"plotdata_{v}.txt", v)
    fits = _write_fits(records, cfg, out / "fits.csv")
    ok = all(r.valid and r.total_violations == 0 and r.coverage_ok for r in records)
    for v, which, slope, *_ in fits:
        good = SLOPE_RANGE[0] <= slope <= SLOPE_RANGE[1]
        print(f"rate {v} {which}: slope {slope:.4f} {'ok' if good else 'OUT OF RANGE'}")
        ok &= bool(good)
    return 0 if ok else 1


def cmd_umbilic(args) -> int:
    cfg, out = _prepare(args)
    if cfg.strategy != "umbilic":
        raise ConfigError("the umbilic command needs strategy = umbilic")
    res = umbilic_experiment(cfg.surface.get("pattern", "lemon"), config=cfg,
                             on_level=lambda r, a: _print_record(r))
    write_records_csv(res.records, out / "records.csv")
    if args.timing:
        write_timing(res.records, out / "timing.csv")
    for v in cfg.variants:
        write_plotdata(res.records, out / f"plotdata_{v}.txt", v, kind="near")
    _write_fits(res.records, cfg, out / "fits.csv", kind="near")
    slopes_ok = len(res.fits) == 2 * len(cfg.variants) and res.min_slope >= UMBILIC_MIN_SLOPE
    print(f"pattern {res.pattern}: near-umbilic min slope {res.min_slope:.4f} "
          f"({'ok' if slopes_ok else 'FAIL'}); rho_max {[round(x, 4) for x in res.rho_max]} "
          f"({'non-decreasing' if res.rho_nondecreasing else 'NOT non-decreasing'})")
    return 0 if slopes_ok and res.rho_nondecreasing else 1


def cmd_export(args) -> int:
    cfg, out = _prepare(args)
    chart = chart_from_config(cfg.surface)
    level = args.level if args.level is not None else cfg.levels[-1]
    ok = True
    if "plotdata" in args.format:
        records = run_refinement(cfg, chart=chart, primary=_primary(cfg))
        write_records_csv(records, out / "records.csv")
        for v in cfg.variants:
            write_plotdata(records, out / f"plotdata_{v}.txt", v)
        ok &= all(r.valid for r in records)
    if "csv" in args.format or "obj" in args.format:
        rec, an = run_level(cfg, chart, estimate_bounds(chart, 64), level, _primary(cfg))
        if an is None:
            print(f"level {level}: {rec.note}")
            return 1
        if "csv" in args.format:
            write_vertex_csv(an, out / f"vertices_{level}.csv")
            write_report_csv(an.report, out / f"report_{level}.csv")
        if "obj" in args.format:
            write_net_obj(an.net, out / f"net_{level}.obj")
            write_stars_obj(an.net, an.vids, out / f"stars_{level}.obj")
        ok &= rec.valid
    print(f"wrote {', '.join(args.format)} to {out}")
    return 0 if ok else 1


COMMANDS = {"generate": cmd_generate, "curvature": cmd_curvature, "verify": cmd_verify,
            "converge": cmd_converge, "umbilic": cmd_umbilic, "export": cmd_export}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CurvnetError as exc:
        print(f"curvnet: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"curvnet: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
