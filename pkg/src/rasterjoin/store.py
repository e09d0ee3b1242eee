"""In-memory approximation stores and their binary ``.april`` container.

Layout (all integers little-endian)::

    header   "APRL" | version u8 | kind u8 | order u8 | flags u8
             | p u32 | map MBR 4 x f64 | record count u32 | tile count u32
    tile     index u32 | raster extent 4 x f64 | record count u32 | records...
    APRIL    id u32 | A byte-length u32 | F byte-length u32 | A bytes | F bytes
    cells    id u32 | byte-length u32 | 0 u32 | cell bytes
    RI       id u32 | interval count u32
             | (start u32 | end u32 | code byte-length u16 | code bytes)*

kind is 0 (APRIL), 1 (RI) or 2 (linestring cells). flags bit 0 marks
VByte-compressed payloads, bit 1 marks S-encoded RI codes. Uncompressed
payloads are flat u32 arrays.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import BinaryIO

from . import codec
from .april import AprilApprox
from .geom import Mbr
from .grid import GridConfig
from .intervals import IntervalList
from .ri import RiApprox, RiInterval, Side

MAGIC = b"APRL"
VERSION = 1
KINDS = {"april": 0, "ri": 1, "cells": 2}
_KIND_NAMES = {v: k for k, v in KINDS.items()}
FLAG_COMPRESSED = 1
FLAG_SIDE_S = 2

_HEADER = struct.Struct("<4sBBBBI4dII")
_TILE = struct.Struct("<I4dI")
_U32 = struct.Struct("<I")
_APRIL_REC = struct.Struct("<III")
_RI_IV = struct.Struct("<IIH")


class FormatError(ValueError):
    pass


@dataclass
class TileStore:
    extent: Mbr
    records: dict[int, object] = field(default_factory=dict)


@dataclass
class ApproxStore:
    """Approximations of one dataset, grouped by partition tile."""

    kind: str
    order: int
    compressed: bool
    p: int
    map_mbr: Mbr
    side: Side = Side.R
    tiles: dict[int, TileStore] = field(default_factory=dict)

    def grid(self, tile: int) -> GridConfig:
        return GridConfig(self.order, self.tiles[tile].extent)

    def get(self, tile: int, oid: int):
        return self.tiles[tile].records[oid]

    def num_records(self) -> int:
        return sum(len(t.records) for t in self.tiles.values())

    def stats(self) -> dict:
        intervals = 0
        nbytes = 0
        for t in self.tiles.values():
            for rec in t.records.values():
                if isinstance(rec, AprilApprox):
                    intervals += len(rec.A) + len(rec.F)
                    nbytes += _payload_len(rec.A) + _payload_len(rec.F)
                elif isinstance(rec, RiApprox):
                    intervals += len(rec.intervals)
                    nbytes += sum(8 + len(iv.code) for iv in rec.intervals)
                else:
                    intervals += len(rec)
                    nbytes += _payload_len(rec) if isinstance(rec, codec.CompressedList) else 4 * len(rec)
        return {"objects": self.num_records(), "intervals": intervals, "payload_bytes": nbytes}


def _payload_len(lst) -> int:
    if isinstance(lst, codec.CompressedList):
        return len(lst.buf)
    return 4 * len(lst.flat)


def _u32_array(values) -> bytes:
    try:
        return struct.pack(f"<{len(values)}I", *values)
    except struct.error as exc:
        raise FormatError(f"value does not fit in u32: {exc}") from None


def _payload(lst, compressed: bool) -> bytes:
    if compressed:
        if not isinstance(lst, codec.CompressedList):
            lst = codec.encode(lst)
        return lst.buf
    if isinstance(lst, codec.CompressedList):
        lst = lst.decode()
    values = lst.flat if isinstance(lst, IntervalList) else list(lst)
    return _u32_array(values)


def _read_list(buf: bytes, compressed: bool, as_intervals: bool):
    if compressed:
        count = sum(1 for b in buf if b < 0x80)
        return codec.CompressedList(bytes(buf), count)
    if len(buf) % 4:
        raise FormatError("u32 payload length not a multiple of 4")
    values = list(struct.unpack(f"<{len(buf) // 4}I", buf))
    return IntervalList(values) if as_intervals else values


def dumps(store: ApproxStore) -> bytes:
    kind = KINDS[store.kind]
    flags = (FLAG_COMPRESSED if store.compressed else 0) | (FLAG_SIDE_S if store.side is Side.S else 0)
    out = bytearray(_HEADER.pack(MAGIC, VERSION, kind, store.order, flags, store.p,
                                 *store.map_mbr, store.num_records(), len(store.tiles)))
    for index in sorted(store.tiles):
        tile = store.tiles[index]
        out += _TILE.pack(index, *tile.extent, len(tile.records))
        for oid in sorted(tile.records):
            rec = tile.records[oid]
            if store.kind == "april":
                a = _payload(rec.A, store.compressed)
                f = _payload(rec.F, store.compressed)
                out += _APRIL_REC.pack(oid, len(a), len(f)) + a + f
            elif store.kind == "cells":
                c = _payload(rec, store.compressed)
                out += _APRIL_REC.pack(oid, len(c), 0) + c
            else:
                out += _U32.pack(oid) + _U32.pack(len(rec.intervals))
                for iv in rec.intervals:
                    if len(iv.code) > 0xFFFF:
                        raise FormatError(f"RI code of {len(iv.code)} bytes exceeds the u16 length field")
                    out += _RI_IV.pack(iv.start, iv.end, len(iv.code)) + iv.code
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("unexpected end of file")
        b = self.data[self.pos:self.pos + n]
        self.pos += n
        return b

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))


def loads(data: bytes) -> ApproxStore:
    rd = _Reader(data)
    magic, version, kind, order, flags, p, x0, y0, x1, y1, total, ntiles = rd.unpack(_HEADER)
    if magic != MAGIC:
        raise FormatError("not an APRL file")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if kind not in _KIND_NAMES:
        raise FormatError(f"unknown record kind {kind}")
    compressed = bool(flags & FLAG_COMPRESSED)
    store = ApproxStore(_KIND_NAMES[kind], order, compressed, p, Mbr(x0, y0, x1, y1),
                        Side.S if flags & FLAG_SIDE_S else Side.R)
    seen = 0
    for _ in range(ntiles):
        index, ex0, ey0, ex1, ey1, nrec = rd.unpack(_TILE)
        tile = TileStore(Mbr(ex0, ey0, ex1, ey1))
        for _ in range(nrec):
            if store.kind == "ri":
                oid, = rd.unpack(_U32)
                niv, = rd.unpack(_U32)
                ivs = []
                for _ in range(niv):
                    s, e, clen = rd.unpack(_RI_IV)
                    ivs.append(RiInterval(s, e, rd.take(clen)))
                tile.records[oid] = RiApprox(order, store.side, tuple(ivs))
            else:
                oid, alen, flen = rd.unpack(_APRIL_REC)
                a = rd.take(alen)
                f = rd.take(flen)
                if store.kind == "april":
                    tile.records[oid] = AprilApprox(order, _read_list(a, compressed, True),
                                                    _read_list(f, compressed, True))
                else:
                    if flen:
                        raise FormatError("linestring record with a non-empty F payload")
                    tile.records[oid] = _read_list(a, compressed, False)
        store.tiles[index] = tile
        seen += nrec
    if seen != total:
        raise FormatError(f"header announces {total} records, found {seen}")
    if rd.pos != len(data):
        raise FormatError("trailing bytes after the last tile")
    return store


def write(store: ApproxStore, fp: BinaryIO | str) -> None:
    data = dumps(store)
    if isinstance(fp, str):
        with open(fp, "wb") as f:
            f.write(data)
    else:
        fp.write(data)


def read(fp: BinaryIO | str) -> ApproxStore:
    if isinstance(fp, str):
        with open(fp, "rb") as f:
            return loads(f.read())
    return loads(fp.read())
