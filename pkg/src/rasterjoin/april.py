"""APRIL approximations (an A-list of all touched cells and an F-list of
fully covered cells) and the interval-join filters built on them."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

from . import codec
from .geom import SimplePolygon
from .grid import GridConfig
from .intervals import (IntervalList, OpCounter, cells_to_intervals, join_containment,
                        join_overlap, one_step_intervalization)
from .raster import Backend, boundary_cells, floodfill_full_cells, scanline_full_cells


class Verdict(enum.Enum):
    TRUE_HIT = "true_hit"
    TRUE_NEGATIVE = "true_negative"
    INDECISIVE = "indecisive"


class FilterError(ValueError):
    pass


AA, AF, FA = "AA", "AF", "FA"
DEFAULT_JOIN_ORDER = (AA, AF, FA)
ALL_JOIN_ORDERS = tuple(permutations(DEFAULT_JOIN_ORDER))


def parse_join_order(text: str | Sequence[str]) -> tuple[str, ...]:
    phases = tuple(p.strip().upper() for p in (text.split(",") if isinstance(text, str) else text))
    if sorted(phases) != sorted(DEFAULT_JOIN_ORDER):
        raise FilterError(f"join order must be a permutation of AA,AF,FA, got {text!r}")
    return phases


@dataclass(frozen=True)
class AprilApprox:
    """A and F are IntervalLists, or CompressedLists when stored compressed."""

    order: int
    A: IntervalList | codec.CompressedList
    F: IntervalList | codec.CompressedList

    @property
    def compressed(self) -> bool:
        return isinstance(self.A, codec.CompressedList)

    def compress(self) -> "AprilApprox":
        if self.compressed:
            return self
        return AprilApprox(self.order, codec.encode(self.A), codec.encode(self.F))

    def decompress(self) -> "AprilApprox":
        if not self.compressed:
            return self
        return AprilApprox(self.order, self.A.decode(), self.F.decode())


def build_april(poly: SimplePolygon, g: GridConfig, backend: Backend | str = Backend.ONESTEP,
                stats: dict | None = None) -> AprilApprox:
    backend = Backend(backend)
    touched, covered = boundary_cells(poly, g, stats)
    if not touched:
        raise FilterError("polygon touches no cell")
    if backend is Backend.ONESTEP:
        A, F = one_step_intervalization(touched, poly, g, stats=stats, covered=covered)
        return AprilApprox(g.order, A, F)
    if backend is Backend.SCANLINE:
        inner = scanline_full_cells(poly, g, touched)
    else:
        inner = floodfill_full_cells(poly, g, touched, stats)
    every = sorted(touched + inner)
    return AprilApprox(g.order, cells_to_intervals(every), cells_to_intervals(sorted(inner + covered)))


def _same_order(r: AprilApprox, s: AprilApprox) -> None:
    if r.order != s.order:
        raise FilterError(f"orders differ ({r.order} vs {s.order}); use mixed_order_filter")


def intersect_filter(r: AprilApprox, s: AprilApprox, order: Sequence[str] = DEFAULT_JOIN_ORDER,
                     counter: OpCounter | None = None) -> Verdict:
    """AA-join decides true negatives, AF/FA-joins decide true hits.

    The verdict does not depend on the phase order: F is a subset of A, so
    whenever AA finds nothing neither can AF nor FA.
    """
    _same_order(r, s)
    for phase in order:
        if phase == AA:
            if not join_overlap(r.A, s.A, counter):
                return Verdict.TRUE_NEGATIVE
        elif phase == AF:
            if join_overlap(r.A, s.F, counter):
                return Verdict.TRUE_HIT
        elif phase == FA:
            if join_overlap(r.F, s.A, counter):
                return Verdict.TRUE_HIT
        else:
            raise FilterError(f"unknown join phase {phase!r}")
    return Verdict.INDECISIVE


def within_filter(r: AprilApprox, s: AprilApprox) -> Verdict:
    """Filter for "r within s": every A-interval of r inside an F-interval of s."""
    _same_order(r, s)
    if not join_overlap(r.A, s.A):
        return Verdict.TRUE_NEGATIVE
    if join_containment(r.A, s.F):
        return Verdict.TRUE_HIT
    return Verdict.INDECISIVE


class _UnitIntervals:
    __slots__ = ("cells",)

    def __init__(self, cells):
        self.cells = cells

    def pairs(self):
        return ((c, c + 1) for c in self.cells)


def linestring_filter(poly: AprilApprox, ls_cells: Sequence[int] | codec.CompressedList) -> Verdict:
    """Polygon/linestring filter; each linestring cell is a unit interval."""
    if isinstance(ls_cells, codec.CompressedList):
        ls = _UnitIntervals(codec.decode_stream(ls_cells))
        ls2 = _UnitIntervals(codec.decode_stream(ls_cells))
    else:
        ls = ls2 = _UnitIntervals(ls_cells)
    if not join_overlap(poly.A, ls):
        return Verdict.TRUE_NEGATIVE
    if join_overlap(poly.F, ls2):
        return Verdict.TRUE_HIT
    return Verdict.INDECISIVE


def _flat(lst) -> list[int]:
    return lst.decode().flat if isinstance(lst, codec.CompressedList) else lst.flat


def scale_down(lst: IntervalList | codec.CompressedList, from_order: int, to_order: int) -> IntervalList:
    """Project intervals at ``from_order`` onto the coarser ``to_order`` grid.

    ``[s, e)`` becomes the closed ``[s >> n, (e - 1) >> n]`` with
    ``n = 2 * (from_order - to_order)``; overlapping or touching results
    are merged.
    """
    if from_order <= to_order:
        raise FilterError(f"cannot scale order {from_order} down to {to_order}")
    n = 2 * (from_order - to_order)
    out: list[int] = []
    f = _flat(lst)
    for k in range(0, len(f), 2):
        s = f[k] >> n
        e = ((f[k + 1] - 1) >> n) + 1
        if out and s <= out[-1]:
            if e > out[-1]:
                out[-1] = e
        else:
            out.append(s)
            out.append(e)
    return IntervalList(out, validate=False)


def mixed_order_filter(r: AprilApprox, s: AprilApprox) -> Verdict:
    """Filter two approximations of different orders on the same extent.

    The finer A-list is scaled down; only the coarse F-list can prove a hit,
    since a Full interval does not stay Full after scaling.
    """
    if r.order == s.order:
        raise FilterError("orders are equal; use intersect_filter")
    fine, coarse = (r, s) if r.order > s.order else (s, r)
    a_fine = scale_down(fine.A, fine.order, coarse.order)
    if not join_overlap(a_fine, coarse.A):
        return Verdict.TRUE_NEGATIVE
    if join_overlap(a_fine, coarse.F):
        return Verdict.TRUE_HIT
    return Verdict.INDECISIVE
