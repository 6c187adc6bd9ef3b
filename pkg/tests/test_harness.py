"""Tests for configuration, sweeps, rate fits, file writers and the CLI.

Oracles: synthetic records with exact power-law errors, the plane (all
estimates exactly zero), the sphere (k1 = k2 = 1/R everywhere), and
round-trips of the written files.
"""

import csv
import math
import warnings

import numpy as np
import pytest

from curvnet import surface as sf
from curvnet.cli import build_parser, main
from curvnet.errors import ConfigError, FitUnavailableError
from curvnet.harness import (ConvergenceRecord, ExperimentConfig, RECORD_COLUMNS, fit_loglog, fit_rate, output_dir,
                             parse_config, run_refinement, write_plotdata, write_records_csv)
from curvnet.harness.experiments import build_net

SPHERE_CFG = """
# unit sphere, meridian/parallel grids
kind = sphere
R = 1
strategy = revolution
meridian_factor = 3
levels = 8, 16
seed = 7
"""


def synthetic(levels, err):
    recs = []
    for L in levels:
        eps = 1.0 / L
        e = err(eps)
        recs.append(ConvergenceRecord(level=L, eps_max=eps, sup_k1={"sin": e}, sup_k2={"sin": 0.5 * e},
                                      coverage_ok=True))
    return recs


# ---------------------------------------------------------------- config


def test_parse_config_splits_surface_and_run_keys():
    cfg = parse_config(SPHERE_CFG, "sphere")
    assert cfg.surface == {"kind": "sphere", "R": "1"}
    assert cfg.strategy == "revolution" and cfg.levels == (8, 16) and cfg.seed == 7
    assert cfg.meridian_factor == 3.0 and cfg.name == "sphere"
    assert cfg.with_overrides(seed=None, levels=(4, 8)).levels == (4, 8)


@pytest.mark.parametrize("bad", ["kind = sphere\nlevels = 8", "kind = sphere\nlevels = 16, 8",
                                 "kind = sphere\nstrategy = magic", "R = 1", "kind = sphere\ndense_factor = 2",
                                 "kind = sphere\nvariants = cot", "kind = sphere\nlevels = 4, x"])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        parse_config(bad, "bad")


def test_output_dir_honours_env(monkeypatch, tmp_path):
    monkeypatch.setenv("CURVNET_OUTPUT_ROOT", str(tmp_path))
    assert output_dir("runs/a") == tmp_path / "runs" / "a"
    assert output_dir(tmp_path / "abs") == tmp_path / "abs"
    monkeypatch.delenv("CURVNET_OUTPUT_ROOT")
    assert str(output_dir("runs/a")) == "runs/a"


# ---------------------------------------------------------------- rate fits


def test_fit_loglog_is_exact_on_power_laws():
    eps = np.array([0.1, 0.05, 0.025, 0.0125])
    s, c, res = fit_loglog(eps, 3 * eps)
    assert s == pytest.approx(1.0, abs=1e-12) and c == pytest.approx(math.log(3), abs=1e-12) and res < 1e-12


@pytest.mark.parametrize("power", [1, 2])
def test_fit_rate_recovers_the_power(power):
    recs = synthetic([8, 16, 32, 64], lambda e: 3 * e**power)
    assert fit_rate(recs, "sin", "k1").slope == pytest.approx(power, abs=1e-12)
    assert fit_rate(recs, "sin", "max").slope == pytest.approx(power, abs=1e-12)


def test_fit_rate_skips_invalid_and_violating_levels():
    recs = synthetic([8, 16, 32, 64], lambda e: e**2)
    recs[0].valid = False
    recs[1].violations = {"height": 1}
    recs[0].sup_k1["sin"] = recs[1].sup_k1["sin"] = 1e9
    f = fit_rate(recs, "sin", "k1")
    assert f.slope == pytest.approx(2.0, abs=1e-12) and f.levels == (32, 64)


def test_fit_rate_zero_errors_warn_and_too_few_levels_raise():
    recs = synthetic([8, 16, 32], lambda e: e)
    recs[0].sup_k1["sin"] = 0.0
    with pytest.warns(RuntimeWarning, match="zero error"):
        fit_rate(recs, "sin", "k1")
    recs[1].sup_k1["sin"] = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(FitUnavailableError):
            fit_rate(recs, "sin", "k1")


# ---------------------------------------------------------------- sweeps


def test_plane_sup_errors_are_exactly_zero():
    cfg = ExperimentConfig(surface={"kind": "plane"}, levels=(4, 8), variants=("sin",))
    recs = run_refinement(cfg)
    for r in recs:
        assert r.valid and r.coverage_ok and r.total_violations == 0
        assert r.sup_k1["sin"] == 0.0 and r.sup_k2["sin"] == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(FitUnavailableError):
            fit_rate(recs, "sin")


def test_sphere_sweep_is_second_order_and_covered():
    recs = run_refinement(parse_config(SPHERE_CFG, "s").with_overrides(levels=(8, 16, 32)))
    assert all(r.valid and r.coverage_ok and r.total_violations == 0 for r in recs)
    assert [r.n_vertices for r in recs] == [24 * 9, 48 * 17, 96 * 33]
    assert fit_rate(recs, "sin").slope == pytest.approx(2.0, abs=0.1)


def test_sweeps_are_deterministic():
    cfg = parse_config(SPHERE_CFG, "s")
    a, b = run_refinement(cfg), run_refinement(cfg)
    assert [r.sup_k1 for r in a] == [r.sup_k1 for r in b]
    c = run_refinement(cfg.with_overrides(seed=8))
    assert [r.sup_k1 for r in a] != [r.sup_k1 for r in c]


def test_traced_strategy_builds_valid_nets():
    cfg = ExperimentConfig(surface={"kind": "triaxial-ellipsoid", "a": 2, "b": 1.5, "c": 1}, strategy="traced",
                           levels=(4, 8), seeds=6, region=(0.0, 2 * math.pi, -0.7, 0.7))
    net = build_net(cfg, sf.chart_from_config(cfg.surface), 4)
    assert net.check_invariants() == []


# ---------------------------------------------------------------- writers


def test_empty_records_csv_has_header_only(tmp_path):
    p = write_records_csv([], tmp_path / "r.csv")
    assert p.read_text() == ",".join(RECORD_COLUMNS) + "\n"


def test_records_csv_and_plotdata_roundtrip(tmp_path):
    recs = synthetic([8, 16], lambda e: e**2)
    recs[1].sup_k1["sin"] = math.nan
    write_records_csv(recs, tmp_path / "r.csv")
    rows = list(csv.DictReader(open(tmp_path / "r.csv")))
    assert [r["level"] for r in rows] == ["8", "16"]
    assert float(rows[0]["sup_k1_sin"]) == 1 / 64 and rows[1]["sup_k1_sin"] == ""
    assert rows[0]["sup_k1_angle"] == ""
    write_plotdata(recs, tmp_path / "p.txt", "sin", which="k2")
    lines = (tmp_path / "p.txt").read_text().splitlines()
    assert lines[0].startswith("#") and len(lines) == 3
    assert [float(x) for x in lines[1].split()] == [0.125, 0.5 / 64]


# ---------------------------------------------------------------- CLI


def test_parser_accepts_global_flags_after_the_command():
    args = build_parser().parse_args(["converge", "--config", "x.cfg", "--variant", "tan", "--levels", "4,8",
                                      "--seed", "3", "--out", "o"])
    assert args.levels == (4, 8) and args.variant == "tan" and args.seed == 3


def test_cli_converge_generate_verify_export(tmp_path, monkeypatch, capsys):
    cfgp = tmp_path / "sphere.cfg"
    cfgp.write_text(SPHERE_CFG)
    monkeypatch.setenv("CURVNET_OUTPUT_ROOT", str(tmp_path / "root"))
    # levels 8, 16 never satisfy the sampling condition but the rates are in range
    assert main(["converge", "--config", str(cfgp), "--out", "c"]) == 0
    out = tmp_path / "root" / "c"
    assert {p.name for p in out.iterdir()} == {"records.csv", "fits.csv", "plotdata_angle.txt", "plotdata_sin.txt",
                                               "plotdata_tan.txt"}
    assert main(["converge", "--config", str(cfgp), "--out", "c", "--timing"]) == 0
    assert (out / "timing.csv").read_text().startswith("level,wall_time_s\n")
    assert main(["generate", "--config", str(cfgp), "--out", "g", "--levels", "8,16"]) == 0
    assert (tmp_path / "root" / "g" / "net_16.obj").exists()
    assert main(["verify", "--config", str(cfgp), "--out", "v"]) == 0
    assert "area_upper" in capsys.readouterr().out
    assert main(["curvature", "--config", str(cfgp), "--out", "k", "--variant", "angle"]) == 0
    hdr = open(tmp_path / "root" / "k" / "vertices_16.csv").readline()
    assert hdr.startswith("vid,u,v,x,y,z")
    assert main(["export", "--config", str(cfgp), "--out", "e", "--format", "obj", "--format", "csv"]) == 0
    assert (tmp_path / "root" / "e" / "stars_16.obj").exists()


def test_cli_exit_codes_for_failures(tmp_path, capsys):
    cfgp = tmp_path / "c.cfg"
    # rates on the plane are unavailable -> the converge assertions fail
    cfgp.write_text("kind = plane\nlevels = 4, 8\n")
    assert main(["converge", "--config", str(cfgp), "--out", str(tmp_path / "o")]) == 1
    assert main(["converge", "--config", str(tmp_path / "missing.cfg")]) == 2
    cfgp.write_text("kind = sphere\nlevels = 8\n")
    assert main(["converge", "--config", str(cfgp)]) == 2
    assert main(["verify"]) == 2  # --config is required
    capsys.readouterr()
