import io
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rasterjoin import codec
from rasterjoin.april import AprilApprox
from rasterjoin.geom import Mbr
from rasterjoin.intervals import IntervalList, cells_to_intervals
from rasterjoin.pipeline import Dataset, JoinConfig, build_store, partition
from rasterjoin.raster import TriClass
from rasterjoin.ri import RiApprox, RiInterval, Side, ri_from_cells
from rasterjoin.store import ApproxStore, FormatError, TileStore, dumps, loads, read, write
from rasterjoin.synth import random_linestrings, random_polygons

R = Dataset(random_polygons(60, seed=1, max_radius=0.1))
S = Dataset(random_polygons(60, seed=2, max_radius=0.1))
L = Dataset(random_linestrings(60, seed=3))


def roundtrip(store):
    data = dumps(store)
    back = loads(data)
    assert dumps(back) == data
    return back


@pytest.mark.parametrize("filt,comp", [("april", False), ("april", True), ("ri", False)])
@pytest.mark.parametrize("p", [1, 3])
def test_roundtrip_polygons(filt, comp, p):
    scheme = partition(R, S, p)
    cfg = JoinConfig(order=10, filter=filt, compressed=comp, partitions=p)
    for side, ds in ((Side.R, R), (Side.S, S)):
        store = build_store(ds, scheme, cfg, side)
        back = roundtrip(store)
        assert back.kind == store.kind and back.order == 10 and back.p == p
        assert back.side is (side if filt == "ri" else back.side)
        assert back.map_mbr == scheme.map_mbr
        for t, ts in store.tiles.items():
            assert back.tiles[t].extent == ts.extent
            for oid, rec in ts.records.items():
                got = back.tiles[t].records[oid]
                if filt == "ri":
                    assert got == rec
                else:
                    assert got.decompress() == rec.decompress()


def test_compressed_and_plain_decode_identically():
    scheme = partition(R, S, 2)
    plain = build_store(R, scheme, JoinConfig(order=12, partitions=2), Side.R)
    comp = build_store(R, scheme, JoinConfig(order=12, partitions=2, compressed=True), Side.R)
    b_plain, b_comp = roundtrip(plain), roundtrip(comp)
    for t in plain.tiles:
        for oid in plain.tiles[t].records:
            assert b_plain.get(t, oid) == b_comp.get(t, oid).decompress()
    assert comp.stats()["payload_bytes"] < plain.stats()["payload_bytes"]


@pytest.mark.parametrize("comp", [False, True])
def test_roundtrip_linestring_cells(comp):
    scheme = partition(R, L, 2)
    store = build_store(L, scheme, JoinConfig(order=10, partitions=2, compressed=comp), Side.S)
    assert store.kind == "cells"
    back = roundtrip(store)
    for t, ts in store.tiles.items():
        for oid, rec in ts.records.items():
            got = back.get(t, oid)
            assert (list(got.stream()) if comp else got) == (list(rec.stream()) if comp else rec)


def test_file_io(tmp_path):
    store = build_store(R, partition(R, S, 1), JoinConfig(order=8), Side.R)
    path = str(tmp_path / "r.april")
    write(store, path)
    assert dumps(read(path)) == dumps(store)
    buf = io.BytesIO()
    write(store, buf)
    buf.seek(0)
    assert dumps(read(buf)) == dumps(store)


def test_header_layout():
    store = ApproxStore("april", 5, False, 1, Mbr(0, 0, 1, 1),
                        tiles={0: TileStore(Mbr(0, 0, 1, 1), {7: AprilApprox(5, IntervalList([3, 9]),
                                                                             IntervalList([4, 5]))})})
    data = dumps(store)
    assert data[:4] == b"APRL" and data[4] == 1 and data[5] == 0 and data[6] == 5 and data[7] == 0
    head = struct.Struct("<4sBBBBI4dII")
    fields = head.unpack_from(data)
    assert fields[5] == 1 and fields[6:10] == (0.0, 0.0, 1.0, 1.0) and fields[10:] == (1, 1)
    rec = data[head.size + struct.calcsize("<I4dI"):]
    assert rec == struct.pack("<III", 7, 8, 8) + struct.pack("<4I", 3, 9, 4, 5)


def test_ri_record_layout():
    ri = ri_from_cells([(9, TriClass.WEAK), (10, TriClass.STRONG), (11, TriClass.WEAK)], 4, Side.S)
    store = ApproxStore("ri", 4, False, 1, Mbr(0, 0, 1, 1), Side.S,
                        {0: TileStore(Mbr(0, 0, 1, 1), {2: ri})})
    data = dumps(store)
    assert data[7] == 2  # side flag
    (iv,) = ri.intervals
    tail = struct.pack("<II", 2, 1) + struct.pack("<IIH", 9, 12, 2) + iv.code
    assert data.endswith(tail)
    assert loads(data).get(0, 2) == ri


@settings(max_examples=40)
@given(st.lists(st.sets(st.integers(0, 4 ** 8 - 1), min_size=1, max_size=50), min_size=1, max_size=6),
       st.booleans())
def test_roundtrip_property(cell_sets, comp):
    recs = {}
    for k, cells in enumerate(cell_sets):
        A = cells_to_intervals(sorted(cells))
        F = cells_to_intervals(sorted(cells)[::3])
        a = AprilApprox(8, A, F)
        recs[k * 3] = a.compress() if comp else a
    store = ApproxStore("april", 8, comp, 1, Mbr(-1, -2, 3, 4), tiles={0: TileStore(Mbr(-1, -2, 3, 4), recs)})
    back = roundtrip(store)
    for oid, rec in recs.items():
        assert back.get(0, oid).decompress() == rec.decompress()


def test_corrupt_files():
    store = build_store(R, partition(R, S, 1), JoinConfig(order=8), Side.R)
    data = dumps(store)
    with pytest.raises(FormatError):
        loads(b"XXXX" + data[4:])
    with pytest.raises(FormatError):
        loads(data[:4] + bytes([9]) + data[5:])
    with pytest.raises(FormatError):
        loads(data[:5] + bytes([7]) + data[6:])
    with pytest.raises(FormatError):
        loads(data[:-3])
    with pytest.raises(FormatError):
        loads(data + b"\x00")
    with pytest.raises(FormatError):
        loads(data[:10])


def test_code_length_overflow():
    n = 0x10000 * 8 // 3 + 8
    iv = RiInterval(0, n, bytes((3 * n + 7) // 8))
    store = ApproxStore("ri", 16, False, 1, Mbr(0, 0, 1, 1),
                        tiles={0: TileStore(Mbr(0, 0, 1, 1), {0: RiApprox(16, Side.R, (iv,))})})
    with pytest.raises(FormatError):
        dumps(store)


def test_stats_counts():
    store = build_store(R, partition(R, S, 1), JoinConfig(order=8, compressed=True), Side.R)
    st_ = store.stats()
    assert st_["objects"] == len(R)
    recs = store.tiles[0].records.values()
    assert st_["intervals"] == sum(len(r.A) + len(r.F) for r in recs)
    assert st_["payload_bytes"] == sum(len(r.A.buf) + len(r.F.buf) for r in recs)
    assert isinstance(next(iter(recs)).A, codec.CompressedList)
