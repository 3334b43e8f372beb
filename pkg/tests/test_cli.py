import csv
import json

import numpy as np
import pytest

from leafwise.cli import main
from leafwise.errors import ConfigError
from leafwise.scenario import (SWEEP_COLUMNS, bundled_scenario, bundled_scenarios, eval_expr,
                               load_scenario, parse_scenario, run_sweep)


def _write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _small(name, points=16, **kw):
    doc = json.loads(bundled_scenario(name).read_text())
    doc["grid"] = {"points": [points]}
    doc["probe"] = {"n_seeds": 0}
    doc.update(kw)
    return doc


def test_bundled_names_are_listed_and_loadable():
    names = bundled_scenarios()
    assert {"regimeA_constant", "c1_variable_beta", "regimeB_variable"} <= set(names)
    for n in names:
        assert load_scenario(n).name == n
    with pytest.raises(ConfigError, match="available"):
        load_scenario("no_such_scenario")


def test_solve_regime_a_constant(tmp_path, capsys):
    assert main(["solve", "regimeA_constant", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["regime"] == "A" and rep["failing"] == []
    pts = rep["comparison_ode"]
    assert len(pts) == 3
    assert [p["stability"] for p in pts] == ["unstable", "stable", "unstable"]
    assert abs(pts[1]["y"] - 1.0) < 1e-12
    for f in ("trace.csv", "fields/u_star.csv", "fields/e0.csv", "fields/beta.csv",
              "plotdata/sup_distance.csv", "plotdata/ratio_profile.csv"):
        assert (tmp_path / f).exists(), f
    assert "all certificates pass" in capsys.readouterr().out


def test_solve_c1_variable_ratio_bounds(tmp_path):
    p = _write(tmp_path, _small("c1_variable_beta", 32))
    assert main(["solve", p, "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    lo, hi = rep["stationary"]["ratio_bounds"]
    y2m, y2p = rep["ladder"]["roots_minus"]["y2"], rep["ladder"]["roots_plus"]["y2"]
    assert y2m - 1e-9 <= lo <= hi <= y2p + 1e-9
    with open(tmp_path / "o" / "plotdata" / "ratio_profile.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 32 and set(rows[0]) == {"index", "x", "ratio", "y2_minus", "y2_plus"}


def test_failed_certificate_exits_one(tmp_path, capsys):
    # the regime expectation is wrong on purpose
    p = _write(tmp_path, _small("regimeA_constant", expect_regime="B"))
    assert main(["solve", p, "--out", str(tmp_path / "o")]) == 1
    assert "regime_expectation" in capsys.readouterr().err


def test_negative_psi2_is_a_config_error(tmp_path, capsys):
    doc = _small("regimeA_constant")
    doc["coefficients"]["constants"]["psi2"] = -0.1
    assert main(["solve", _write(tmp_path, doc)]) == 2
    assert "Psi2 >= 0" in capsys.readouterr().err


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("coefficients"),
    lambda d: d["coefficients"].update(fields={}),
    lambda d: d.update(grid={"points": [4]}),
    lambda d: d.update(expect_regime="Z"),
    lambda d: d.update(theorem={"id": "nope"}),
    lambda d: d.update(probe={"n_seeds": 3}, seed=None),
    lambda d: d.update(evolution={"dt": -1}),
])
def test_config_errors_exit_two(tmp_path, mutate):
    doc = _small("regimeA_constant")
    mutate(doc)
    assert main(["solve", _write(tmp_path, doc)]) == 2


def test_missing_file_and_bad_json_exit_two(tmp_path):
    assert main(["solve", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", str(bad)]) == 2
    assert main(["solve", "regimeA_constant", "--threads", "0"]) == 2
    assert main(["frobnicate"]) == 2


def test_empty_sweep_range_exits_two(tmp_path):
    p = _write(tmp_path, _small("regimeA_constant"))
    assert main(["sweep", p, "--param", "Phi", "--from", "1", "--to", "1", "--steps", "3"]) == 2
    assert main(["sweep", p, "--param", "Phi", "--from", "1", "--to", "0", "--steps", "3"]) == 2
    assert main(["sweep", p, "--param", "Phi", "--from", "0", "--to", "1", "--steps", "0"]) == 2


def test_psi3_sweep_flips_the_regime(tmp_path):
    p = _write(tmp_path, _small("regimeA_constant", evolution={"dt": 0.01, "t_end": 5}))
    out = tmp_path / "sw"
    assert main(["sweep", p, "--param", "psi3_scale", "--from", "-1", "--to", "1",
                 "--steps", "5", "--out", str(out)]) == 0
    with open(out / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == SWEEP_COLUMNS
    assert [r["regime"] for r in rows] == ["B", "B", "C1", "A", "A"]
    assert len(list((out / "points").glob("*.json"))) == 5


def test_phi_sweep_matches_the_predicted_interval():
    doc = _small("c1_geometry", evolution={"dt": 0.01, "t_end": 200, "snapshot_stride": 5})
    sc = parse_scenario(doc)
    step = 0.25
    rows = run_sweep(sc, "Phi", -0.5, 1.5, 9)
    for r in rows:
        if r["predicted"] != r["converged"]:
            # disagreement is allowed only within one grid step of an interval endpoint
            assert min(abs(r["value"] - r["phi_lo"]), abs(r["value"] - r["phi_hi"])) <= step
    assert sum(r["converged"] for r in rows) >= 3


def test_threaded_sweep_matches_serial(tmp_path):
    sc = parse_scenario(_small("regimeA_constant", evolution={"dt": 0.01, "t_end": 5}))
    a = run_sweep(sc, "beta_shift", -0.2, 0.2, 3)
    b = run_sweep(sc, "beta_shift", -0.2, 0.2, 3, threads=2)
    assert a == b


def test_report_is_reproducible(tmp_path):
    p = _write(tmp_path, _small("c1_variable_beta", probe={"n_seeds": 3}))
    texts = []
    for k in range(2):
        assert main(["solve", p, "--out", str(tmp_path / f"o{k}")]) == 0
        rep = json.loads((tmp_path / f"o{k}" / "report.json").read_text())
        rep.pop("timestamp")
        texts.append(json.dumps(rep, sort_keys=True))
    assert texts[0] == texts[1]


def test_fields_from_csv_and_arrays(tmp_path):
    x = np.arange(16) * 2 * np.pi / 16
    with open(tmp_path / "beta.csv", "w") as fh:
        fh.write("index,value\n")
        for i, v in enumerate(-1 + 0.1 * np.cos(x)):
            fh.write(f"{i},{float(v)!r}\n")
    doc = {"name": "t", "grid": {"points": [16]},
           "coefficients": {"fields": {"beta_top": "beta.csv", "psi1": [2.0] * 16,
                                       "psi2": 0.25, "psi3": 0.0}}}
    sc = load_scenario(_write(tmp_path, doc))
    assert np.allclose(sc.coefficients.beta_top.values, -1 + 0.1 * np.cos(x))
    doc["coefficients"]["fields"]["psi1"] = [2.0] * 15
    with pytest.raises(ConfigError):
        load_scenario(_write(tmp_path, doc))


def test_expression_evaluator_is_restricted():
    assert eval_expr("2*pi + sqrt(4)", {}) == pytest.approx(2 * np.pi + 2)
    for bad in ("__import__('os')", "x.real", "[1, 2]", "open('f')", "lambda: 1", "1 if 1 else 2"):
        with pytest.raises(ConfigError):
            eval_expr(bad, {"x": 1.0})
    with pytest.raises(ConfigError):
        eval_expr("y + 1", {"x": 1.0})
