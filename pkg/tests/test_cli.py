import csv
import json

import pytest

from monoseq.cli import RunConfig, UsageError, main, parse_config


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_table_csv(tmp_path, capsys):
    path = tmp_path / "t.csv"
    code, _, _ = run_cli(capsys, "table", "--n", "3", "--grid", "4097", "--output", str(path))
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 4 * 4097
    row = next(r for r in rows if r["k"] == "2" and r["s"] == "0.0")
    assert float(row["v"]) == 1.5
    assert next(r for r in rows if r["k"] == "0")["h"] == ""


def test_table_json_with_variance(tmp_path, capsys):
    path = tmp_path / "t.json"
    code, _, _ = run_cli(capsys, "table", "--n", "2", "--grid", "65", "--format", "json", "--with-variance", "--output", str(path))
    assert code == 0
    doc = json.loads(path.read_text())
    assert doc["grid"]["points"] == 65
    assert doc["critical"][0] is None
    assert doc["layers"][2]["v"][0] == 1.5
    assert doc["layers"][0]["h"] is None
    assert abs(doc["layers"][2]["w"][0] - 0.25) < 1e-4


def test_simulate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        code, out, _ = run_cli(capsys, "simulate", "--n", "2", "--reps", "4", "--seed", "7", "--output", str(p))
        assert code == 0
        assert json.loads(out)["reps"] == 4
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 4


def test_simulate_with_series(tmp_path, capsys):
    p = tmp_path / "s.txt"
    code, _, _ = run_cli(capsys, "simulate", "--n", "5", "--grid", "129", "--reps", "10", "--seed", "1", "--with-variance", "--output", str(p))
    assert code == 0
    lines = p.read_text().splitlines()
    assert len(lines) == 10 and all(len(line.split(",")) == 2 for line in lines)


def test_bounds_strict_passes(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--n-list", "10,100,1000", "--strict")
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_properties_and_poisson(capsys):
    code, out, _ = run_cli(capsys, "properties", "--n", "20", "--grid", "257", "--reps", "5", "--seed", "3", "--strict")
    assert code == 0
    assert all(r["passed"] for r in json.loads(out)["properties"])
    code, out, _ = run_cli(capsys, "poisson", "--n", "20", "--grid", "257", "--reps", "200", "--seed", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["nu"] == 20.0 and "mean_within_bound" in doc


def test_clt_outputs(tmp_path, capsys):
    p = tmp_path / "h.csv"
    code, out, _ = run_cli(capsys, "clt", "--n", "30", "--grid", "257", "--reps", "300", "--seed", "5", "--output", str(p))
    assert code == 0
    doc = json.loads(out)
    for key in ("n", "reps", "mean", "stderr", "variance", "v_table", "w_table", "ks", "ks_alt_centering", "bounds", "properties"):
        assert key in doc
    rows = list(csv.DictReader(p.open()))
    assert sum(int(r["count"]) for r in rows) == 300


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--n", "3", "--reps", "4"],
        ["table"],
        ["table", "--n", "3", "--bogus"],
        ["frobnicate"],
        ["table", "--n", "0"],
        ["table", "--n", "3", "--grid", "10"],
        ["table", "--n", "3", "--output", "/nonexistent-dir/x.csv"],
        ["table", "--n", "1000000"],
        ["clt", "--n", "3", "--reps", "1", "--seed", "1"],
    ],
)
def test_argument_errors_exit_one(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 1
    assert "error" in err


def test_json_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "table", "n": 2, "grid_points": 65, "format": "json"}))
    config = parse_config(["table", "--json-config", str(cfg), "--n", "3"])
    assert config.n == 3 and config.grid_points == 65 and config.format == "json"
    cfg.write_text(json.dumps({"mystery": 1}))
    with pytest.raises(UsageError):
        parse_config(["table", "--json-config", str(cfg)])


def test_strict_failure_exits_two(monkeypatch, capsys):
    import monoseq.cli as cli
    from monoseq.stats import PropertyRecord

    monkeypatch.setattr(cli, "property_report", lambda vt, wt: [PropertyRecord("fake", 1.0, 0.0)])
    code, _, _ = run_cli(capsys, "properties", "--n", "3", "--grid", "65", "--strict")
    assert code == 2
    code, _, _ = run_cli(capsys, "properties", "--n", "3", "--grid", "65")
    assert code == 0


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig(command="table", n=3, format="xml").validate()
    with pytest.raises(UsageError):
        RunConfig(command="poisson", n=3, reps=10, seed=1, nu=-1.0).validate()
