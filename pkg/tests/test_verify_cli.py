import json
import math

import numpy as np
import pytest

from moutard import ScalarField, constant, make_grid, sample
from moutard.cli import main
from moutard.verify import (
    ResidualReport,
    RunConfig,
    convergence_order,
    emit_fields,
    read_fields,
    run,
    run_transform,
    run_verify,
)


# -- configuration ----------------------------------------------------------

def test_run_config_defaults_and_ladder():
    cfg = RunConfig()
    assert (cfg.r_min, cfg.r_max, cfg.theta_min) == (1.0, 3.0, 0.3)
    assert cfg.theta_max == pytest.approx(math.pi - 0.3)
    assert [g.n_r for g in cfg.ladder()] == [129, 257, 513]
    assert RunConfig(command="transform-twofold").n_r == 65
    single = RunConfig(command="transform-single")
    assert (single.theta_min, single.theta_max) == (0.6, 1.2)


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(command="plot")
    with pytest.raises(ValueError):
        RunConfig(residual_tol=0)
    with pytest.raises(ValueError):
        RunConfig(levels=2)
    with pytest.raises(ValueError):
        RunConfig(format="xml")
    with pytest.raises(ValueError):
        RunConfig(r_min=0)


def test_config_from_kebab_case_dict():
    cfg = RunConfig.from_dict({"family": "eq15", "C": 2.0, "n-r": 33, "n-theta": 33})
    assert (cfg.c, cfg.n_r, cfg.n_theta) == (2.0, 33, 33)
    with pytest.raises(ValueError):
        RunConfig.from_dict({"colour": "red"})


def test_convergence_order_of_exact_power_law():
    hs = [0.1, 0.05, 0.025]
    assert convergence_order(hs, [3 * h**4 for h in hs]) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        convergence_order(hs[:2], [1, 2])


# -- verify -------------------------------------------------------------------

def test_verify_plane_wave_pair_passes():
    report = run_verify(RunConfig(family="eq10", n_r=65, n_theta=65))
    assert report.passed, report.to_json()
    assert report.orders["residual[solution]"] > 3.5
    assert len(report.ladder["residual[solution]"]) == 3


def test_verify_seed_family_checks_each_seed():
    report = run_verify(RunConfig(family="planewave", n_r=33, n_theta=33, residual_tol=1e-5))
    assert set(report.orders) == {"residual[seed1]", "residual[seed2]", "residual[solution]"}
    assert report.passed


def test_perturbed_potential_fails_without_decay():
    report = run_verify(RunConfig(family="eq9", perturb=0.01, n_r=33, n_theta=33))
    assert not report.passed
    errs = [lvl["linf"] for lvl in report.ladder["residual[solution]"]]
    # the residual plateaus at the size of the perturbation instead of decaying
    assert errs[2] > 0.5 * errs[0]
    assert errs[2] == pytest.approx(0.01, rel=0.05)
    assert abs(report.orders["residual[solution]"]) < 0.5


def test_library_errors_end_up_in_report():
    report, fields = run(RunConfig(family="eq14"))
    assert not report.passed and fields == {}
    assert "needs a degree" in report.error


def test_report_json_is_sorted_and_deterministic():
    cfg = RunConfig(family="eq15", n_r=17, n_theta=17)
    a, b = run_verify(cfg).to_json(), run_verify(cfg).to_json()
    assert a == b
    doc = json.loads(a)
    assert list(doc) == sorted(doc)
    assert doc["passed"] in (True, False)


def test_order_verdict_waived_at_roundoff():
    from moutard.verify import _record
    from moutard.grid import Norms
    grids = RunConfig(n_r=17, n_theta=17).ladder()
    rep = ResidualReport("x", {})
    _record(rep, "q", grids, [Norms(1e-12, 1e-12)] * 3, 1e-6, 3.5, floor=1e-9)
    assert rep.verdicts["q:order"] and rep.notes
    rep = ResidualReport("x", {})
    _record(rep, "q", grids, [Norms(1e-6, 1e-6)] * 3, 1e-5, 3.5, floor=1e-9)
    assert not rep.verdicts["q:order"]


# -- transforms ---------------------------------------------------------------

def test_twofold_plane_wave_pipeline():
    report, fields = run_transform(RunConfig(command="transform-twofold", family="planewave",
                                             n_r=33, n_theta=33, comparison_tol=1e-4, residual_tol=1e-4))
    assert report.passed, report.to_json()
    assert set(fields) == {"potential", "F", "sol1", "sol2"}
    assert report.path_defect < 1e-6
    assert report.orders["potential"] > 3.5


def test_twofold_bessel_pipeline_matches_fixed_degree_potential():
    report, _ = run_transform(RunConfig(command="transform-twofold", family="seeds-bessel", p=0))
    assert report.passed, report.to_json()
    assert report.finest("potential")["linf"] < 1e-6


def test_single_pipeline_reports_masked_points():
    report, fields = run_transform(RunConfig(command="transform-single"))
    assert report.passed, report.to_json()
    assert any("masked" in n for n in report.notes)
    assert set(fields) == {"potential", "solution", "trivial"}


def test_inexact_pipeline_reported_not_raised():
    cfg = RunConfig(command="transform-twofold", family="planewave", n_r=9, n_theta=9,
                    exactness_tol=1e-12)
    report, _ = run(cfg)
    assert report.error.startswith("InexactFormError")
    assert report.path_defect > 1e-12


# -- field output -------------------------------------------------------------

@pytest.fixture
def small_grid():
    return make_grid(1, 3, 0.3, 2.8, 9, 9)


def test_zero_field_csv(tmp_path, small_grid):
    path = tmp_path / "z.csv"
    emit_fields(constant(small_grid, 0), "csv", path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r,theta,re,im"
    assert len(lines) == 1 + 81
    assert all(line.endswith(",0,0") for line in lines[1:])


def test_constant_field_csv_rows(tmp_path, small_grid):
    path = tmp_path / "c.csv"
    emit_fields(constant(small_grid, 3 + 4j), "csv", path)
    rows = path.read_text().splitlines()[1:]
    assert all(row.endswith(",3,4") for row in rows)
    # r-outer order: the first n_theta rows share r_min
    assert {row.split(",")[0] for row in rows[:9]} == {"1"}


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip_is_bitwise(tmp_path, small_grid, fmt):
    f = sample(lambda r, t: np.exp(1j * r * np.cos(t)) / (r**2 + np.pi), small_grid)
    path = tmp_path / f"f.{fmt}"
    emit_fields(f, fmt, path)
    back = read_fields(path, fmt)
    assert back.grid == f.grid or fmt == "csv"
    np.testing.assert_array_equal(back.values, f.values)


def test_json_carries_grid_metadata(tmp_path, small_grid):
    path = tmp_path / "f.json"
    emit_fields(constant(small_grid, 1j), "json", path)
    doc = json.loads(path.read_text())
    assert doc["grid"] == small_grid.metadata()
    assert doc["values"][:4] == [0.0, 1.0, 0.0, 1.0]


def test_emit_error_names_path(tmp_path, small_grid):
    bad = tmp_path / "missing" / "f.csv"
    with pytest.raises(OSError, match="missing"):
        emit_fields(constant(small_grid, 0), "csv", bad)


def test_identical_runs_write_identical_bytes(tmp_path):
    outs = []
    for name in ("a", "b"):
        path = tmp_path / f"{name}.csv"
        assert main(["catalog", "eval", "--family", "eq17", "--what", "potential",
                     "--n-r", "17", "--n-theta", "17", "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


# -- command line -------------------------------------------------------------

def test_cli_catalog_list(capsys):
    assert main(["catalog", "list"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert any(row["family"] == "eq9-planewave" for row in rows)


def test_cli_catalog_eval_to_stdout(capsys):
    assert main(["catalog", "eval", "--family", "eq10", "--n-r", "9", "--n-theta", "9"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "r,theta,re,im" and len(out) == 82


def test_cli_catalog_eval_constraint_error(capsys):
    assert main(["catalog", "eval", "--family", "eq15", "--c", "0.5"]) == 1
    assert "C" in capsys.readouterr().err


def test_cli_verify_pass_and_fail_exit_codes(tmp_path, capsys):
    args = ["verify", "--family", "eq9", "--c", "1.0", "--n-r", "65", "--n-theta", "65",
            "--residual-tol", "1e-5"]
    assert main(args) == 0
    report = tmp_path / "r.json"
    assert main(args + ["--perturb", "0.01", "--report", str(report)]) == 1
    doc = json.loads(report.read_text())
    assert doc["passed"] is False and doc["verdicts"]


def test_cli_unknown_family_still_writes_report(capsys):
    assert main(["verify", "--family", "eq99"]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert "unknown family" in doc["error"]


def test_cli_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "eq15", "n-r": 17, "n-theta": 17, "residual_tol": 1e-3,
                               "order_min": 5.0}))
    assert main(["verify", "--config", str(cfg)]) == 1          # order 5 is out of reach
    capsys.readouterr()
    assert main(["verify", "--config", str(cfg), "--order-min", "3.5"]) == 0


def test_cli_bad_config_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["verify", "--config", str(cfg)]) == 2


def test_cli_transform_writes_requested_field(tmp_path, capsys):
    out = tmp_path / "u.json"
    code = main(["transform", "twofold", "--family", "planewave", "--n-r", "33", "--n-theta", "33",
                 "--comparison-tol", "1e-4", "--residual-tol", "1e-4",
                 "--output", str(out), "--format", "json", "--what", "F"])
    assert code == 0
    f = read_fields(out, "json")
    assert isinstance(f, ScalarField) and f.grid.n_r == 129
    assert main(["transform", "twofold", "--family", "planewave", "--n-r", "33", "--n-theta", "33",
                 "--output", str(out), "--what", "nope"]) == 1


def test_cli_rejects_bad_choice():
    with pytest.raises(SystemExit) as info:
        main(["verify", "--format", "xml"])
    assert info.value.code == 2
