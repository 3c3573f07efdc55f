"""Command-line interface: every subcommand, exit codes, replayability."""

import json

import pytest

from apdisc.cli import main


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main(list(argv) + ["--out", str(out)])
    data = json.loads(out.read_text()) if out.exists() else None
    return code, data


def test_bound_box(tmp_path):
    code, d = run(tmp_path, "bound", "--box", "16")
    assert code == 0 and abs(d["f"] - 2.0) < 1e-12


def test_bound_polytope(tmp_path):
    poly = tmp_path / "tri.poly"
    poly.write_text("dim 2\nvertex 0 0\nvertex 6 0\nvertex 0 6\n")
    code, d = run(tmp_path, "bound", "--polytope", str(poly))
    assert code == 0 and d["f"] > 1


def test_cert_and_color(tmp_path):
    code, d = run(tmp_path, "cert", "--box", "16", "--mode", "right")
    assert code == 0 and d["value"] > 0
    code, d = run(tmp_path, "color", "--box", "64", "--seed", "7")
    assert code == 0 and d["ratio"] < 10
    code2, d2 = run(tmp_path, "color", "--box", "64", "--seed", "7")
    assert d2["disc"] == d["disc"]
    code, d = run(tmp_path, "color", "--box", "1", "--seed", "7")
    assert d["disc"] == 1


def test_brute(tmp_path):
    code, d = run(tmp_path, "brute", "--box", "4")
    assert code == 0 and d["min_disc"] == 2 and d["evaluated"] == 8


def test_lowerbound(tmp_path):
    code, d = run(tmp_path, "lowerbound", "--box", "4")
    assert code == 0 and 0 < d["value"] < 1


def test_verify_default(tmp_path):
    code, d = run(tmp_path, "verify")
    assert code == 0 and d["ok"]


def test_sweep_slope(tmp_path):
    code, d = run(tmp_path, "sweep", "--box", "1",
                  "--scales", "64,128,256,512,1024")
    assert code == 0
    assert abs(d["slope"] - 0.25) < 0.05
    code, d = run(tmp_path, "sweep", "--box", "1", "--scales", "64")
    assert d["degenerate"]


def test_csv_output(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["bound", "--box", "8", "--format", "csv", "--out", str(out)])
    assert code == 0
    header = out.read_text().splitlines()[0]
    assert "f" in header.split(",")


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 2


def test_resource_guard_exit_3(tmp_path):
    code = main(["brute", "--box", "64", "--out", str(tmp_path / "x.json")])
    assert code == 3
