"""Delta + variable-byte compression of interval lists.

The flattened list is strictly increasing, so it is stored as its first
value followed by the gaps between neighbours. Each integer is written in
7-bit groups, least significant group first; the high bit of a byte is set
when more bytes of the same integer follow.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .intervals import IntervalList

MAX_VALUE = (1 << 32) - 1
_MAX_BYTES = 5


class CodecError(ValueError):
    pass


@dataclass(frozen=True)
class CompressedList:
    buf: bytes
    count: int

    def stream(self) -> "DecodeStream":
        return DecodeStream(self)

    def pairs(self) -> Iterator[tuple[int, int]]:
        s = DecodeStream(self)
        return zip(s, s)

    def decode(self) -> IntervalList:
        return IntervalList(DecodeStream(self), validate=False)

    def __len__(self) -> int:
        return self.count // 2


def _put_varint(out: bytearray, v: int) -> None:
    while v >= 0x80:
        out.append((v & 0x7F) | 0x80)
        v >>= 7
    out.append(v)


def encode_values(values: Iterable[int]) -> CompressedList:
    out = bytearray()
    prev = None
    count = 0
    for v in values:
        if not 0 <= v <= MAX_VALUE:
            raise CodecError(f"value {v} outside the unsigned 32-bit range")
        if prev is None:
            _put_varint(out, v)
        else:
            if v <= prev:
                raise CodecError("values must be strictly increasing")
            _put_varint(out, v - prev)
        prev = v
        count += 1
    return CompressedList(bytes(out), count)


def encode(lst: IntervalList | Iterable[int]) -> CompressedList:
    values = lst.flat if isinstance(lst, IntervalList) else lst
    return encode_values(values)


class DecodeStream:
    """Incremental decoder; ``offset`` is the number of bytes consumed so far."""

    __slots__ = ("_buf", "_count", "_left", "_prev", "offset")

    def __init__(self, c: CompressedList):
        self._buf = c.buf
        self._count = c.count
        self._left = c.count
        self._prev = None
        self.offset = 0

    def __iter__(self) -> "DecodeStream":
        return self

    def __next__(self) -> int:
        if self._left == 0:
            if self.offset != len(self._buf):
                raise CodecError("trailing bytes after the last encoded value")
            raise StopIteration
        buf = self._buf
        pos = self.offset
        v = 0
        shift = 0
        while True:
            if pos >= len(buf):
                raise CodecError("truncated buffer")
            b = buf[pos]
            pos += 1
            v |= (b & 0x7F) << shift
            if not b & 0x80:
                break
            shift += 7
            if shift >= 7 * _MAX_BYTES:
                raise CodecError("overlong varint")
        if v > MAX_VALUE:
            raise CodecError("varint exceeds 32 bits")
        self.offset = pos
        self._left -= 1
        if self._prev is not None:
            if v == 0:
                raise CodecError("zero gap in a strictly increasing list")
            v += self._prev
            if v > MAX_VALUE:
                raise CodecError("decoded value exceeds 32 bits")
        self._prev = v
        return v


def decode_stream(c: CompressedList) -> DecodeStream:
    return DecodeStream(c)
