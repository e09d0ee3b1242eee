"""RI approximations: intervals of Hilbert cells each carrying a bitstring of
3-bit cell-type codes, and the RI-join filter that ANDs aligned codes.

Codes are packed MSB-first, three bits per cell in curve order, with the
final byte zero-padded. The R and S encodings differ by XOR with ``110``;
ANDing an R code with an S code is non-zero exactly when the two cell
types prove an intersection inside the cell.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .april import FilterError, Verdict
from .geom import SimplePolygon
from .grid import GridConfig
from .intervals import IntervalList, cells_to_intervals, join_containment, join_overlap
from .raster import Backend, TriClass, classify_tri

SWAP_MASK = 0b110


class Side(enum.Enum):
    R = "R"
    S = "S"

    def other(self) -> "Side":
        return Side.S if self is Side.R else Side.R


_CODES = {
    Side.R: {TriClass.FULL: 0b011, TriClass.STRONG: 0b101, TriClass.WEAK: 0b100},
    Side.S: {TriClass.FULL: 0b101, TriClass.STRONG: 0b011, TriClass.WEAK: 0b010},
}
_DECODE = {side: {v: k for k, v in table.items()} for side, table in _CODES.items()}


def encode_cell(t: TriClass, side: Side | str) -> int:
    return _CODES[Side(side)][t]


def decode_cell(code: int, side: Side | str) -> TriClass:
    return _DECODE[Side(side)][code]


def pack_codes(codes: Sequence[int]) -> bytes:
    v = 0
    for c in codes:
        v = (v << 3) | c
    nbits = 3 * len(codes)
    nbytes = (nbits + 7) // 8
    return (v << (8 * nbytes - nbits)).to_bytes(nbytes, "big")


def unpack_codes(code: bytes, ncells: int) -> list[int]:
    nbits = 3 * ncells
    v = int.from_bytes(code, "big") >> (8 * len(code) - nbits)
    return [(v >> (3 * (ncells - 1 - k))) & 0b111 for k in range(ncells)]


@dataclass(frozen=True)
class RiInterval:
    start: int
    end: int
    code: bytes

    def __post_init__(self):
        n = self.end - self.start
        if n <= 0:
            raise ValueError(f"empty RI interval [{self.start}, {self.end})")
        if len(self.code) != (3 * n + 7) // 8:
            raise ValueError("code length does not match the interval length")
        pad = 8 * len(self.code) - 3 * n
        if pad and self.code[-1] & ((1 << pad) - 1):
            raise ValueError("non-zero padding bits")


@dataclass(frozen=True)
class RiApprox:
    order: int
    side: Side
    intervals: tuple[RiInterval, ...]


def _mask_byte(phase: int) -> int:
    b = 0
    for t in range(8):
        b = (b << 1) | ((SWAP_MASK >> (2 - (phase + t) % 3)) & 1)
    return b


# XOR mask for a byte whose first bit sits at position ``phase`` (mod 3) of a cell code
_XOR_MASKS = tuple(_mask_byte(p) for p in range(3))


def _byte_at(code: bytes, bit: int) -> int:
    k = bit >> 3
    sh = bit & 7
    b0 = code[k] if k < len(code) else 0
    if not sh:
        return b0
    b1 = code[k + 1] if k + 1 < len(code) else 0
    return ((b0 << sh) | (b1 >> (8 - sh))) & 0xFF


def aligned_and(x: RiInterval, y: RiInterval, same_encoding: bool) -> bool:
    """True iff some common cell of x and y has a non-zero code AND.

    Leading bytes outside the common cells are skipped, the earlier-starting
    code is shifted into alignment byte by byte, x is XOR-swapped when both
    use the same encoding, and bits past the common fragment are masked off
    in the last byte.
    """
    lo = max(x.start, y.start)
    hi = min(x.end, y.end)
    if lo >= hi:
        raise FilterError(f"intervals [{x.start},{x.end}) and [{y.start},{y.end}) do not overlap")
    nbits = 3 * (hi - lo)
    bx = 3 * (lo - x.start)
    by = 3 * (lo - y.start)
    xc, yc = x.code, y.code
    nbytes = (nbits + 7) // 8
    for k in range(nbytes):
        xb = _byte_at(xc, bx + 8 * k)
        yb = _byte_at(yc, by + 8 * k)
        if same_encoding:
            xb ^= _XOR_MASKS[(8 * k) % 3]
        if k == nbytes - 1 and nbits & 7:
            tail = (0xFF << (8 - (nbits & 7))) & 0xFF
            xb &= tail
            yb &= tail
        if xb & yb:
            return True
    return False


def ri_join(X: RiApprox, Y: RiApprox) -> Verdict:
    if X.order != Y.order:
        raise FilterError(f"RI orders differ ({X.order} vs {Y.order})")
    same = X.side is Y.side
    xs, ys = X.intervals, Y.intervals
    i = j = 0
    overlap = False
    while i < len(xs) and j < len(ys):
        xi, yj = xs[i], ys[j]
        if xi.start < yj.end and yj.start < xi.end:
            if aligned_and(xi, yj, same):
                return Verdict.TRUE_HIT
            overlap = True
        if xi.end <= yj.end:
            i += 1
        else:
            j += 1
    return Verdict.INDECISIVE if overlap else Verdict.TRUE_NEGATIVE


def ri_from_cells(cells: Sequence[tuple[int, TriClass]], order: int, side: Side | str) -> RiApprox:
    side = Side(side)
    table = _CODES[side]
    out: list[RiInterval] = []
    run: list[int] = []
    start = prev = None
    for cid, t in cells:
        if prev is not None and cid <= prev:
            raise ValueError("cells must be strictly ascending")
        if prev is None or cid != prev + 1:
            if run:
                out.append(RiInterval(start, prev + 1, pack_codes(run)))
            start, run = cid, []
        run.append(table[t])
        prev = cid
    if run:
        out.append(RiInterval(start, prev + 1, pack_codes(run)))
    return RiApprox(order, side, tuple(out))


def build_ri(poly: SimplePolygon, g: GridConfig, side: Side | str = Side.R,
             backend: Backend | str = Backend.SCANLINE) -> RiApprox:
    cells = classify_tri(poly, g, backend)
    if not cells:
        raise FilterError("polygon touches no cell")
    return ri_from_cells(cells, g.order, side)


def swap_side(ri: RiApprox) -> RiApprox:
    """Re-encode for the other join input by XORing every cell code with 110."""
    out = []
    for iv in ri.intervals:
        n = iv.end - iv.start
        codes = [c ^ SWAP_MASK for c in unpack_codes(iv.code, n)]
        out.append(RiInterval(iv.start, iv.end, pack_codes(codes)))
    return RiApprox(ri.order, ri.side.other(), tuple(out))


def decode_intervals(ri: RiApprox) -> list[tuple[int, TriClass]]:
    table = _DECODE[ri.side]
    return [(iv.start + k, table[c]) for iv in ri.intervals
            for k, c in enumerate(unpack_codes(iv.code, iv.end - iv.start))]


def _full_intervals(ri: RiApprox) -> IntervalList:
    full = _CODES[ri.side][TriClass.FULL]
    cells = [iv.start + k for iv in ri.intervals
             for k, c in enumerate(unpack_codes(iv.code, iv.end - iv.start)) if c == full]
    return cells_to_intervals(cells)


def ri_within(X: RiApprox, Y: RiApprox) -> Verdict:
    """Filter for "x within y": true hit when every cell of x is Full in y."""
    if X.order != Y.order:
        raise FilterError(f"RI orders differ ({X.order} vs {Y.order})")
    xs = IntervalList([v for iv in X.intervals for v in (iv.start, iv.end)])
    ys = IntervalList([v for iv in Y.intervals for v in (iv.start, iv.end)])
    if not join_overlap(xs, ys):
        return Verdict.TRUE_NEGATIVE
    if join_containment(xs, _full_intervals(Y)):
        return Verdict.TRUE_HIT
    return Verdict.INDECISIVE
