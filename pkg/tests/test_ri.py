import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rasterjoin.april import FilterError, Verdict, build_april, intersect_filter
from rasterjoin.geom import Mbr, polygon_within, polygons_intersect
from rasterjoin.grid import GridConfig, grid_for_extent
from rasterjoin.intervals import IntervalList
from rasterjoin.raster import TriClass, classify_tri
from rasterjoin.ri import (SWAP_MASK, RiApprox, RiInterval, Side, aligned_and, build_ri, decode_cell,
                           decode_intervals, encode_cell, pack_codes, ri_from_cells, ri_join, ri_within,
                           swap_side, unpack_codes)
from rasterjoin.synth import random_polygons

from .conftest import square
from .test_intervals import SEVEN_POLY

G8 = GridConfig(3, Mbr(0, 0, 8, 8))
TRI = (TriClass.FULL, TriClass.STRONG, TriClass.WEAK)


def cells_prove_contact(a: TriClass, b: TriClass) -> bool:
    """Cell types that prove a common point: anything with Full, or Strong-Strong."""
    return a is TriClass.FULL or b is TriClass.FULL or (a is TriClass.STRONG and b is TriClass.STRONG)


def bits(code: bytes, ncells: int) -> str:
    return "".join(f"{c:03b}" for c in unpack_codes(code, ncells))


def interval(start, types, side):
    return RiInterval(start, start + len(types), pack_codes([encode_cell(t, side) for t in types]))


def test_table_codes():
    assert encode_cell(TriClass.FULL, Side.R) == 0b011
    assert encode_cell(TriClass.STRONG, Side.R) == 0b101
    assert encode_cell(TriClass.WEAK, Side.R) == 0b100
    assert encode_cell(TriClass.FULL, Side.S) == 0b101
    assert encode_cell(TriClass.STRONG, Side.S) == 0b011
    assert encode_cell(TriClass.WEAK, Side.S) == 0b010
    for t in TRI:
        assert encode_cell(t, Side.R) ^ SWAP_MASK == encode_cell(t, Side.S)
        assert decode_cell(encode_cell(t, Side.S), Side.S) is t


def test_code_and_matches_cell_table():
    for a in TRI:
        for b in TRI:
            assert bool(encode_cell(a, Side.R) & encode_cell(b, Side.S)) == cells_prove_contact(a, b)


def test_interval_code_example():
    ri = ri_from_cells([(9, TriClass.WEAK), (10, TriClass.STRONG), (11, TriClass.WEAK)], 3, Side.R)
    (iv,) = ri.intervals
    assert (iv.start, iv.end) == (9, 12)
    assert bits(iv.code, 3) == "100101100"
    assert len(iv.code) == 2


def test_single_full_cell_layout():
    iv = interval(5, [TriClass.FULL], Side.R)
    assert iv.code == bytes([0b01100000])


def test_interval_validation():
    with pytest.raises(ValueError):
        RiInterval(3, 3, b"")
    with pytest.raises(ValueError):
        RiInterval(3, 4, b"\x00\x00")
    with pytest.raises(ValueError):
        RiInterval(3, 4, bytes([0b01100001]))


def test_alignment_example():
    x = RiInterval(9, 13, pack_codes([0b100, 0b101, 0b101, 0b101]))
    y = RiInterval(11, 15, pack_codes([0b100, 0b100, 0b101, 0b100]))
    assert bits(x.code, 4) == "100101101101" and bits(y.code, 4) == "100100101100"
    assert not aligned_and(x, y, same_encoding=True)
    assert not aligned_and(y, x, same_encoding=True)


def test_aligned_and_examples():
    assert aligned_and(interval(0, [TriClass.FULL], Side.R), interval(0, [TriClass.WEAK], Side.S), False)
    assert not aligned_and(interval(0, [TriClass.WEAK], Side.R), interval(0, [TriClass.WEAK], Side.S), False)
    with pytest.raises(FilterError):
        aligned_and(interval(0, [TriClass.WEAK], Side.R), interval(1, [TriClass.WEAK], Side.S), False)


def test_aligned_and_against_cell_oracle():
    rnd = random.Random(12)
    for _ in range(100_000):
        xs, ys = rnd.randrange(40), rnd.randrange(40)
        xt = [rnd.choice(TRI) for _ in range(rnd.randint(1, 30))]
        yt = [rnd.choice(TRI) for _ in range(rnd.randint(1, 30))]
        if not (xs < ys + len(yt) and ys < xs + len(xt)):
            continue
        same = rnd.random() < 0.5
        x = interval(xs, xt, Side.R)
        y = interval(ys, yt, Side.R if same else Side.S)
        lo, hi = max(xs, ys), min(xs + len(xt), ys + len(yt))
        expected = any(cells_prove_contact(xt[c - xs], yt[c - ys]) for c in range(lo, hi))
        assert aligned_and(x, y, same) == expected


def test_build_ri_spans_equal_april_a():
    g = grid_for_extent(Mbr(0, 0, 1, 1), 8)
    for _, p in random_polygons(200, seed=4, max_radius=0.1):
        ri = build_ri(p, g)
        spans = IntervalList([v for iv in ri.intervals for v in (iv.start, iv.end)])
        assert spans == build_april(p, g).A
        for iv in ri.intervals:
            assert len(iv.code) == (3 * (iv.end - iv.start) + 7) // 8
        assert decode_intervals(ri) == classify_tri(p, g)


def test_seven_interval_ri():
    assert len(build_ri(SEVEN_POLY, G8).intervals) == 7


def test_join_examples():
    x = ri_from_cells([(1, TriClass.WEAK)], 3, Side.R)
    y = ri_from_cells([(5, TriClass.FULL)], 3, Side.S)
    assert ri_join(x, y) is Verdict.TRUE_NEGATIVE
    y2 = ri_from_cells([(1, TriClass.WEAK)], 3, Side.S)
    assert ri_join(x, y2) is Verdict.INDECISIVE
    y3 = ri_from_cells([(1, TriClass.FULL)], 3, Side.S)
    assert ri_join(x, y3) is Verdict.TRUE_HIT
    with pytest.raises(FilterError):
        ri_join(x, ri_from_cells([(1, TriClass.FULL)], 4, Side.S))


def test_strong_strong_pair():
    g = GridConfig(2, Mbr(0, 0, 1, 1))
    r = square(0.26, 0.26, 0.49, 0.49)
    s = square(0.255, 0.27, 0.48, 0.495)
    assert ri_join(build_ri(r, g, Side.R), build_ri(s, g, Side.S)) is Verdict.TRUE_HIT
    assert intersect_filter(build_april(r, g), build_april(s, g)) is Verdict.INDECISIVE
    assert polygons_intersect(r, s)


@given(st.lists(st.tuples(st.integers(0, 60), st.sampled_from(TRI)), max_size=30, unique_by=lambda t: t[0]))
def test_swap_side_roundtrip(cells):
    cells = sorted(cells)
    r = ri_from_cells(cells, 4, Side.R)
    s = swap_side(r)
    assert s.side is Side.S
    assert s == ri_from_cells(cells, 4, Side.S)
    assert swap_side(s) == r


def test_soundness_and_relation_to_april():
    g = grid_for_extent(Mbr(0, 0, 1, 1), 8)
    R = random_polygons(250, seed=51, min_radius=0.01, max_radius=0.06)
    S = random_polygons(250, seed=52, min_radius=0.01, max_radius=0.06)
    rr = [build_ri(p, g, Side.R) for _, p in R]
    rs = [build_ri(p, g, Side.S) for _, p in S]
    ss = [swap_side(x) for x in rs]
    ar = [build_april(p, g) for _, p in R]
    as_ = [build_april(p, g) for _, p in S]
    n = 0
    for i, (_, r) in enumerate(R):
        for j, (_, s) in enumerate(S):
            if not r.mbr.intersects(s.mbr):
                continue
            n += 1
            v = ri_join(rr[i], rs[j])
            assert ri_join(rr[i], ss[j]) is v  # same encoding, XOR on the fly
            exact = polygons_intersect(r, s)
            if v is Verdict.TRUE_HIT:
                assert exact
            elif v is Verdict.TRUE_NEGATIVE:
                assert not exact
            va = intersect_filter(ar[i], as_[j])
            assert (va is Verdict.TRUE_NEGATIVE) == (v is Verdict.TRUE_NEGATIVE)
            if va is Verdict.TRUE_HIT:
                assert v is Verdict.TRUE_HIT
    assert n > 500


def test_ri_within():
    g = grid_for_extent(Mbr(0, 0, 1, 1), 6)
    outer = square(0.1, 0.1, 0.9, 0.9)
    inner = square(0.3, 0.3, 0.5, 0.5)
    far = square(0.95, 0.95, 0.99, 0.99)
    Y = build_ri(outer, g, Side.S)
    assert ri_within(build_ri(inner, g), Y) is Verdict.TRUE_HIT
    assert polygon_within(inner, outer)
    assert ri_within(build_ri(far, g), Y) is Verdict.TRUE_NEGATIVE
    assert ri_within(build_ri(square(0.05, 0.3, 0.5, 0.5), g), Y) is Verdict.INDECISIVE
    assert isinstance(Y, RiApprox)
