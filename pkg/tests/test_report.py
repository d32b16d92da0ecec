import json

from mpmath import mpf

from dop.report import make_report, overall_status, render_report
from dop.weights import ParameterSet

PARAMS = ParameterSet.of(("17/10",), ("23/10",), "2/5")


def rep(residual, name="identity"):
    return make_report(name, PARAMS, 16, 256, residual, 128, seconds=0.25)


def test_empty_list_is_empty_json_array():
    assert json.loads(render_report([])) == []


def test_pass_flag_and_schema():
    (d,) = json.loads(render_report([rep(mpf(2) ** -200)]))
    assert d["pass"] is True
    assert set(d) >= {"identity", "params", "K", "prec", "residual", "tolerance", "pass",
                      "seconds"}
    assert d["params"] == {"a": ["17/10"], "b": ["23/10"], "eta": "2/5"}
    assert isinstance(d["residual"], str) and float(d["residual"]) < float(d["tolerance"])
    assert d["seconds"] is None


def test_boundary_counts_as_pass():
    assert rep(mpf(2) ** -128).passed
    assert not rep(mpf(2) ** -127).passed


def test_mixed_status_is_fail():
    assert overall_status([rep(0), rep(1)]) == "fail"
    assert overall_status([rep(0)]) == "pass"
    assert render_report([rep(0), rep(1)], "text").splitlines()[-1].startswith("overall: fail")


def test_rendering_is_deterministic():
    reports = [rep(mpf(3) ** -90, "b"), rep(mpf(7) ** -80, "a")]
    for fmt in ("json", "csv", "text"):
        assert render_report(reports, fmt) == render_report(list(reports), fmt)


def test_timings_opt_in():
    (d,) = json.loads(render_report([rep(0)], timings=True))
    assert d["seconds"] == 0.25


def test_csv_header():
    lines = render_report([rep(0)], "csv").splitlines()
    assert lines[0].split(",")[:4] == ["identity", "a", "b", "eta"]
    assert len(lines) == 2
