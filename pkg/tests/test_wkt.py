import pytest
from hypothesis import given

from rasterjoin.geom import Linestring, SimplePolygon
from rasterjoin.wkt import Unsupported, WktError, load_file, load_lines, parse_geometry, parse_line, to_wkt

from .strategies import linestrings, star_polygons


def test_parse_polygon_and_linestring():
    p = parse_geometry("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))")
    assert isinstance(p, SimplePolygon) and len(p) == 4
    ls = parse_geometry("linestring(0 0, 2.5e0 -1)")
    assert isinstance(ls, Linestring) and ls.vertices[1] == (2.5, -1.0)


def test_holes_dropped_and_z_truncated():
    p = parse_geometry("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (1 1, 2 1, 2 2, 1 1))")
    assert p.ring == SimplePolygon([(0, 0), (4, 0), (4, 4), (0, 4)]).ring
    z = parse_geometry("POLYGON Z ((0 0 5, 1 0 5, 1 1 5, 0 0 5))")
    assert len(z) == 3


def test_unsupported_and_errors():
    for text in ("MULTIPOLYGON (((0 0, 1 0, 1 1, 0 0)))", "POINT (1 2)", "POLYGON EMPTY"):
        with pytest.raises(Unsupported):
            parse_geometry(text)
    for text in ("POLYGON ((0 0, 1 x, 1 1, 0 0))", "BLOB (1 2)", "POLYGON ((0 0, 1 0, 1 1)", "POLYGON 0 0"):
        with pytest.raises(WktError):
            parse_geometry(text)


def test_id_prefix():
    assert parse_line("42;POLYGON ((0 0, 1 0, 1 1, 0 0))")[0] == 42
    assert parse_line("POLYGON ((0 0, 1 0, 1 1, 0 0))")[0] is None
    with pytest.raises(WktError):
        parse_line("x;POLYGON ((0 0, 1 0, 1 1, 0 0))")
    with pytest.raises(WktError):
        parse_line(f"{1 << 32};POLYGON ((0 0, 1 0, 1 1, 0 0))")


def test_load_lines_policy():
    lines = [
        "# header comment",
        "POLYGON ((0 0, 1 0, 1 1, 0 0))",
        "",
        "MULTIPOLYGON (((0 0, 1 0, 1 1, 0 0)))",
        "POLYGON ((0 0, 1 1, 2 2, 0 0))",
        "9;LINESTRING (0 0, 1 1)",
    ]
    res = load_lines(lines)
    assert [oid for oid, _ in res.objects] == [1, 9]
    assert res.skipped == {"MULTIPOLYGON": 1, "invalid": 1}
    assert res.num_skipped == 2
    with pytest.raises(WktError, match="line 2"):
        load_lines(["POLYGON ((0 0, 1 0, 1 1, 0 0))", "POLYGON ((0 0, 1 q, 1 1, 0 0))"])
    with pytest.raises(WktError, match="duplicate id 3"):
        load_lines(["3;POLYGON ((0 0, 1 0, 1 1, 0 0))", "3;POLYGON ((0 0, 1 0, 1 1, 0 0))"])


def test_load_file(tmp_path):
    path = tmp_path / "d.wkt"
    path.write_text("5;POLYGON ((0 0, 1 0, 1 1, 0 0))\n")
    res = load_file(str(path))
    assert res.objects[0][0] == 5


@given(star_polygons())
def test_polygon_roundtrip(p):
    assert parse_geometry(to_wkt(p)) == p


@given(linestrings())
def test_linestring_roundtrip(ls):
    assert parse_geometry(to_wkt(ls)) == ls
