import csv
import io
import json

import pytest

from leorouting import analytics, cli, planner


def _run(argv, capsys):
    rc = cli.run(argv)
    return rc, capsys.readouterr().out


def test_plan_ok_and_json_stable(capsys):
    rc, out = _run(["plan", "--kind", "STR"], capsys)
    assert rc == cli.EXIT_OK
    rep = json.loads(out)
    assert rep["decision"]["n_hops"] == 14
    assert len(rep["ideal_positions"]) == 13
    assert _run(["plan", "--kind", "STR"], capsys)[1] == out


def test_exit_codes(capsys, monkeypatch):
    rc, out = _run(["plan", "--kind", "STR", "--set", "lmax1_km=500"], capsys)
    assert rc == cli.EXIT_INFEASIBLE and json.loads(out)["status"] == "infeasible"
    rc, out = _run(["plan", "--set", "foo=1"], capsys)
    assert rc == cli.EXIT_CONFIG and json.loads(out)["status"] == "config_error"
    assert _run(["simulate", "--trials", "0"], capsys)[0] == cli.EXIT_CONFIG
    assert _run(["compare", "--kinds", "XYZ"], capsys)[0] == cli.EXIT_CONFIG

    def broken(*a, **k):
        raise analytics.NumericalError("density has no mass on its window")
    monkeypatch.setattr(analytics, "ee_analytic", broken)
    rc, out = _run(["analyze", "--kind", "STR"], capsys)
    assert rc == cli.EXIT_NUMERICAL and json.loads(out)["status"] == "numerical_failure"


def test_analyze_matches_library(sp, p, ctx, capsys):
    rc, out = _run(["analyze", "--kind", "STR"], capsys)
    rep = json.loads(out)
    d = planner.search("STR", sp.theta_big, p, ctx).decision
    assert rep["availability"] == analytics.availability(d, p, ctx)
    assert rep["ee_analytic_bit_per_j"] == analytics.ee_analytic(d, p, ctx)


def test_csv_round_trip():
    rows = [{"a": 1.0 / 3.0, "b": "ISR", "c": float("nan"), "d": 7}]
    text = cli.dumps_csv(["a", "b", "c", "d"], rows)
    back = list(csv.DictReader(io.StringIO(text)))
    parsed = [{"a": float(r["a"]), "b": r["b"], "c": float(r["c"] or "nan"), "d": int(r["d"])}
              for r in back]
    assert cli.dumps_csv(["a", "b", "c", "d"], parsed) == text
    assert text.splitlines()[0] == "a,b,c,d"


def test_json_nan_becomes_null():
    assert json.loads(cli.dumps_json({"x": float("nan"), "y": [float("inf"), 1.0]})) == \
        {"x": None, "y": [None, 1.0]}


def test_simulate_deterministic_and_file_output(tmp_path, capsys):
    args = ["simulate", "--kind", "STR", "--trials", "6", "--seed", "4", "--set", "n_s=300",
            "--set", "n_g=300"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.run(args + ["--out", str(a)]) == 0
    assert cli.run(args + ["--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["stats"]["trials"] == 6 and "ee_analytic_bit_per_j" in rep


def test_sweep_availability_grows_with_satellites(tmp_path):
    out = tmp_path / "s.csv"
    rc = cli.run(["sweep", "--axis", "n_s", "--values", "300,600,1200", "--kinds", "ISR",
                  "--out", str(out)])
    assert rc == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["n_s"] for r in rows] == ["300", "600", "1200"]
    av = [float(r["availability_analytic"]) for r in rows]
    assert av == sorted(av)
    assert list(rows[0]) == cli.SWEEP_HEADER


def test_compare_analytic_equal_budget(tmp_path):
    out = tmp_path / "c.csv"
    assert cli.run(["compare", "--source", "analytic", "--equal-budget", "--axis", "beta",
                    "--values", "5", "--out", str(out)]) == 0
    rows = {r["kind"]: r for r in csv.DictReader(out.open())}
    assert rows["ISR"]["n_s"] == "2000" and rows["STR"]["n_s"] == "1000"


def test_spec_validation():
    with pytest.raises(cli.ConfigError):
        cli.ExperimentSpec("sweep", sweep_axis=("nope", [1]))
    with pytest.raises(cli.ConfigError):
        cli.ExperimentSpec("sweep", sweep_axis=("n_s", []))
