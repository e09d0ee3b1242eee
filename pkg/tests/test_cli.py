import csv
import io
import json
import subprocess
import sys

import pytest

from rasterjoin.cli import REPORT_KEYS, main
from rasterjoin.oracle import naive_join, naive_selection
from rasterjoin.pipeline import Dataset
from rasterjoin.store import read
from rasterjoin.synth import random_linestrings, random_polygons
from rasterjoin.wkt import load_file, to_wkt


def write_wkt(path, objs, extra=()):
    with open(path, "w") as f:
        for oid, g in objs:
            f.write(f"{oid};{to_wkt(g)}\n")
        for line in extra:
            f.write(line + "\n")
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_pairs(path):
    with open(path) as f:
        return {tuple(map(int, line.split(","))) for line in f if line.strip()}


@pytest.fixture
def data(tmp_path):
    R = random_polygons(80, seed=1, max_radius=0.08)
    S = random_polygons(80, seed=2, max_radius=0.08)
    return {
        "R": R, "S": S,
        "r": write_wkt(tmp_path / "r.wkt", R, ["MULTIPOLYGON (((0 0, 1 0, 1 1, 0 0)))"]),
        "s": write_wkt(tmp_path / "s.wkt", S),
        "dir": tmp_path,
    }


def test_build_one_polygon(tmp_path, capsys):
    src = write_wkt(tmp_path / "one.wkt", random_polygons(1, seed=5))
    out_path = tmp_path / "one.april"
    code, out, _ = run(capsys, "build", src, "--out", out_path, "--order", 10)
    assert code == 0
    report = json.loads(out)
    assert report["objects"] == 1 and report["kind"] == "april" and report["order"] == 10
    store = read(str(out_path))
    assert store.num_records() == 1
    assert report["file_bytes"] == out_path.stat().st_size


def test_build_compress_decodes_identically(data, capsys):
    a, b = data["dir"] / "a.april", data["dir"] / "b.april"
    assert run(capsys, "build", data["r"], "--out", a, "--order", 12)[0] == 0
    code, _, err = run(capsys, "build", data["r"], "--out", b, "--order", 12, "--compress")
    assert code == 0 and "skipped 1" in err and "MULTIPOLYGON" in err
    sa, sb = read(str(a)), read(str(b))
    for t in sa.tiles:
        for oid, rec in sa.tiles[t].records.items():
            assert sb.get(t, oid).decompress() == rec


def test_join_filters_agree(data, capsys):
    expected = naive_join(data["R"], data["S"])
    results = {}
    for filt in ("none", "april", "ri"):
        out_path = data["dir"] / f"{filt}.pairs"
        code, out, _ = run(capsys, "join", "--left", data["r"], "--right", data["s"], "--filter", filt,
                           "--order", 9, "--partitions", 2, "--out", out_path)
        assert code == 0
        rep = json.loads(out)
        for k in REPORT_KEYS:
            assert k in rep
        assert rep["true_hits"] + rep["true_negatives"] + rep["indecisive"] == rep["candidates"]
        assert abs(rep["true_hits_pct"] + rep["true_negatives_pct"] + rep["indecisive_pct"] - 100) < 0.01
        results[filt] = read_pairs(out_path)
    assert results["none"] == results["april"] == results["ri"] == expected


def test_self_join_reflexive(tmp_path, capsys):
    P = random_polygons(3, seed=9)
    src = write_wkt(tmp_path / "p.wkt", P)
    out_path = tmp_path / "pairs"
    assert run(capsys, "join", "--left", src, "--right", src, "--order", 8, "--out", out_path)[0] == 0
    pairs = read_pairs(out_path)
    assert {(k, k) for k, _ in P} <= pairs


def test_join_with_stored_approximations(data, capsys):
    d = data["dir"]
    for side, src, other in (("R", data["r"], data["s"]), ("S", data["s"], data["r"])):
        code, _, _ = run(capsys, "build", src, "--out", d / f"{side}.ri", "--approx", "ri", "--side", side,
                         "--order", 9, "--partitions", 2, "--context", other)
        assert code == 0
    out_path = d / "pairs"
    code, out, _ = run(capsys, "join", "--left", data["r"], "--right", data["s"], "--left-approx", d / "R.ri",
                       "--right-approx", d / "S.ri", "--out", out_path, "--report", "csv")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert "seconds_total" in row and int(row["candidates"]) > 0
    assert read_pairs(out_path) == naive_join(data["R"], data["S"])
    # an S-side file offered as the left input is diagnosed
    code, _, err = run(capsys, "join", "--left", data["r"], "--right", data["s"], "--left-approx", d / "S.ri")
    assert code == 1 and "error:" in err


def test_incompatible_partitioning(data, capsys):
    d = data["dir"]
    run(capsys, "build", data["r"], "--out", d / "r.april", "--order", 9, "--partitions", 2)
    code, _, err = run(capsys, "join", "--left", data["r"], "--right", data["s"], "--left-approx", d / "r.april")
    assert code == 1 and "incompatible" in err


def test_polyline_and_errors(tmp_path, capsys):
    P = random_polygons(30, seed=3)
    L = random_linestrings(60, seed=4)
    p, ls = write_wkt(tmp_path / "p.wkt", P), write_wkt(tmp_path / "l.wkt", L)
    out_path = tmp_path / "pairs"
    code, _, _ = run(capsys, "join", "--left", p, "--right", ls, "--predicate", "polyline", "--order", 10,
                     "--out", out_path)
    assert code == 0 and read_pairs(out_path) == naive_join(P, L, "polyline")
    code, _, err = run(capsys, "join", "--left", p, "--right", ls, "--predicate", "polyline", "--filter", "ri")
    assert code == 1 and "error:" in err


def test_parse_error_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.wkt"
    bad.write_text("POLYGON ((0 0, 1 0, 1 1, 0 0))\nPOLYGON ((0 0, 1 z, 1 1, 0 0))\n")
    code, _, err = run(capsys, "build", bad, "--out", tmp_path / "x.april")
    assert code == 1 and "line 2" in err


def test_select(data, capsys):
    q = "POLYGON ((0.2 0.2, 0.6 0.25, 0.5 0.7, 0.2 0.2))"
    out_path = data["dir"] / "ids"
    code, out, _ = run(capsys, "select", "--query", q, "--data", data["s"], "--order", 10, "--out", out_path)
    assert code == 0
    from rasterjoin.wkt import parse_geometry
    expected = naive_selection(parse_geometry(q), Dataset(data["S"]))
    with open(out_path) as f:
        assert {int(x) for x in f} == expected
    assert json.loads(out)["results"] == len(expected)
    code, _, err = run(capsys, "select", "--data", data["s"])
    assert code == 1


def test_synth(tmp_path, capsys):
    out_path = tmp_path / "s.wkt"
    assert run(capsys, "synth", "polygons", "-n", 25, "--seed", 3, "--out", out_path)[0] == 0
    assert len(load_file(str(out_path)).objects) == 25
    code, out, _ = run(capsys, "synth", "linestrings", "-n", 4)
    assert code == 0 and out.count("LINESTRING") == 4


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "rasterjoin.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "build" in res.stdout
