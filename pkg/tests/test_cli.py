import csv
import json

import pytest

from confcalc import cli


def run(tmp_path, suite, config=None, *extra):
    args = [suite, "--out", str(tmp_path / "out")]
    if config is not None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        args += ["--config", str(path)]
    code = cli.main(args + list(extra))
    report = None
    rp = tmp_path / "out" / "report.json"
    if rp.exists():
        report = json.loads(rp.read_text())
    return code, report


def test_list_suites():
    names = [n for n, _ in cli.list_suites()]
    assert "ward-sphere" in names
    assert len(names) == 8 and names[-1] == "all"
    assert names == [n for n, _ in cli.list_suites()]


def test_list_flag(capsys):
    assert cli.main(["--list"]) == 0
    assert "ward-halfplane" in capsys.readouterr().out


def test_schwarzian_suite(tmp_path):
    code, report = run(tmp_path, "schwarzian")
    assert code == 0 and report["pass"]
    mob = [c for c in report["checks"] if c["name"].startswith("mobius")]
    assert mob and all(c["residual"] < 1e-12 for c in mob)
    assert set(report["checks"][0]) >= {"name", "value", "oracle", "residual", "tol", "pass"}


def test_ward_sphere_default_two_point(tmp_path):
    cfg = {"ward-sphere": {"configurations": [{"points": [[0, 0], [1, 0]], "charges": [1, -1]}]}}
    code, report = run(tmp_path, "ward-sphere", cfg)
    assert code == 0
    assert len(report["checks"]) == 20
    assert all(c["residual"] < 1e-6 for c in report["checks"])
    with open(tmp_path / "out" / "grid.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["re_w", "im_w", "re_value", "im_value", "residual"]
    assert len(rows) == 21


def test_complex_values_are_encoded(tmp_path):
    _, report = run(tmp_path, "ward-sphere", {"ward-sphere": {"w": ["2+1j"]}})
    value = report["checks"][0]["value"]
    assert set(value) == {"re", "im"}


def test_malformed_annulus_exits_2(tmp_path, capsys):
    code, report = run(tmp_path, "factorize", {"factorize": {"rho_A": 1.5, "rho_B": 0.5}})
    assert code == 2 and report is None
    assert "rho_A" in capsys.readouterr().err


@pytest.mark.parametrize("config", [
    {"unknown-suite": {}},
    {"flow": {"semigroup_tol": -1}},
    {"ward-halfplane": {"point": [0, -1]}},
    {"ward-sphere": {"configurations": [{"points": [[0, 0], [1, 0]], "charges": [1, 1]}]}},
])
def test_config_errors_exit_2(tmp_path, config):
    assert run(tmp_path, "flow", config)[0] == 2


def test_unparsable_config_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["flow", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_failing_check_exits_1(tmp_path):
    code, report = run(tmp_path, "flow", None, "--tol", "1e-30")
    assert code == 1 and not report["pass"]


def test_numerical_failure_is_reported(tmp_path):
    # a w grid that hits a marked point cannot be evaluated
    code, report = run(tmp_path, "ward-sphere",
                       {"ward-sphere": {"configurations": [{"points": [[0, 0], [1, 0]],
                                                            "charges": [1, -1]}],
                                        "w": [[0, 0], [2, 1]]}})
    assert code == 1
    bad = report["checks"][0]
    assert not bad["pass"] and "error" in bad
    assert report["checks"][1]["pass"]


def test_deterministic_reports(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["schwarzian", "--out", str(a), "--seed", "7"])
    cli.main(["schwarzian", "--out", str(b), "--seed", "7"])
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
