"""Sorted half-open interval lists over Hilbert cell ids.

An :class:`IntervalList` is stored flat: interval ``i`` is
``[flat[2i], flat[2i+1])``. The merge joins accept anything with a
``pairs()`` method yielding ``(start, end)`` in ascending order, so they run
unchanged over compressed lists that decode while they are consumed.
"""
from __future__ import annotations

import enum
from bisect import bisect_left, bisect_right
from typing import Iterable, Iterator, Sequence

from .geom import Location, SimplePolygon, point_in_polygon
from .grid import GridConfig, hilbert_coords, hilbert_index


class IntervalError(ValueError):
    pass


class IntervalList:
    __slots__ = ("flat",)

    def __init__(self, flat: Iterable[int] = (), validate: bool = True):
        self.flat: list[int] = list(flat)
        if validate:
            self.check()

    def check(self) -> None:
        f = self.flat
        if len(f) % 2:
            raise IntervalError("flat interval list must have even length")
        for k in range(1, len(f)):
            # starts may not touch the previous end: adjacent runs must be merged
            if not f[k - 1] < f[k]:
                raise IntervalError(f"interval list not strictly increasing at position {k}")
        if f and f[0] < 0:
            raise IntervalError("negative cell id")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "IntervalList":
        return cls([v for p in pairs for v in p])

    def pairs(self) -> Iterator[tuple[int, int]]:
        f = self.flat
        return zip(f[0::2], f[1::2])

    def cells(self) -> Iterator[int]:
        for s, e in self.pairs():
            yield from range(s, e)

    def num_cells(self) -> int:
        f = self.flat
        return sum(f[k + 1] - f[k] for k in range(0, len(f), 2))

    def __contains__(self, cell: int) -> bool:
        return bisect_right(self.flat, cell) % 2 == 1

    def __len__(self) -> int:
        return len(self.flat) // 2

    def __bool__(self) -> bool:
        return bool(self.flat)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntervalList) and self.flat == other.flat

    def __repr__(self) -> str:
        return f"IntervalList({list(self.pairs())})"


class OpCounter:
    """Counts loop steps of a merge join (instrumentation for tests)."""

    __slots__ = ("n",)

    def __init__(self):
        self.n = 0


def _pairs(x) -> Iterator[tuple[int, int]]:
    if hasattr(x, "pairs"):
        return iter(x.pairs())
    return iter(x)


def cells_to_intervals(cells: Sequence[int]) -> IntervalList:
    flat: list[int] = []
    prev = None
    for c in cells:
        if prev is not None and c <= prev:
            raise IntervalError("cells must be strictly ascending")
        if prev is not None and c == prev + 1:
            flat[-1] = c + 1
        else:
            flat.append(c)
            flat.append(c + 1)
        prev = c
    return IntervalList(flat, validate=False)


def merge_intervals(X: IntervalList, Y: IntervalList) -> IntervalList:
    """Union of two lists, merging overlapping and touching intervals."""
    out: list[int] = []
    for s, e in sorted(list(X.pairs()) + list(Y.pairs())):
        if out and s <= out[-1]:
            if e > out[-1]:
                out[-1] = e
        else:
            out += (s, e)
    return IntervalList(out, validate=False)


def join_overlap(X, Y, counter: OpCounter | None = None) -> bool:
    """True iff some interval of X shares a cell with some interval of Y."""
    xs, ys = _pairs(X), _pairs(Y)
    x = next(xs, None)
    y = next(ys, None)
    steps = 0
    try:
        while x is not None and y is not None:
            steps += 1
            if x[0] < y[1] and y[0] < x[1]:
                return True
            if x[1] <= y[1]:
                x = next(xs, None)
            else:
                y = next(ys, None)
        return False
    finally:
        if counter is not None:
            counter.n += steps


def join_containment(X, Y, counter: OpCounter | None = None) -> bool:
    """True iff every interval of X lies inside a single interval of Y."""
    xs, ys = _pairs(X), _pairs(Y)
    y = next(ys, None)
    steps = 0
    try:
        for x in xs:
            steps += 1
            while y is not None and y[1] <= x[0]:
                steps += 1
                y = next(ys, None)
            if y is None or y[0] > x[0] or y[1] < x[1]:
                return False
        return True
    finally:
        if counter is not None:
            counter.n += steps


class GapType(enum.Enum):
    FULL = "full"
    EMPTY = "empty"
    UNKNOWN = "unknown"


def _sorted_contains(values: Sequence[int], v: int) -> bool:
    k = bisect_left(values, v)
    return k < len(values) and values[k] == v


def check_neighbors(c: int, P: Sequence[int], F_so_far: Sequence[int] | IntervalList,
                    g: GridConfig) -> GapType:
    """Type the first cell ``c`` of a gap from its already-typed 4-neighbors.

    Only neighbors with a smaller id than ``c`` have been typed. A
    non-Partial one lies in a committed Full interval (then ``c`` is Full)
    or in an Empty gap (then ``c`` is Empty).
    """
    flat = F_so_far.flat if isinstance(F_so_far, IntervalList) else F_so_far
    col, row = hilbert_coords(c, g.order)
    side = g.side
    for nc, nr in ((col, row + 1), (col, row - 1), (col - 1, row), (col + 1, row)):
        if not (0 <= nc < side and 0 <= nr < side):
            continue
        n = hilbert_index((nc, nr), g.order)
        if n >= c or _sorted_contains(P, n):
            continue
        return GapType.FULL if bisect_right(flat, n) % 2 == 1 else GapType.EMPTY
    return GapType.UNKNOWN


def one_step_intervalization(P: Sequence[int], poly: SimplePolygon, g: GridConfig,
                             use_neighbors: bool = True, stats: dict | None = None,
                             covered: Sequence[int] = ()) -> tuple[IntervalList, IntervalList]:
    """A- and F-lists straight from the sorted boundary-touched cells ``P``.

    Every gap between non-consecutive ids of P is either entirely Full or
    entirely Empty, so typing its first cell types the gap. A Full gap is
    appended to F and extends the current A interval; an Empty gap closes
    it. ``covered`` lists the cells of P the polygon covers completely
    (see ``raster.boundary_cells``); they are Full as well.
    """
    if not P:
        raise IntervalError("empty partial cell list (degenerate geometry)")
    A: list[int] = []
    F: list[int] = []
    n = len(P)
    a_start = P[0]
    tests = 0
    i = 0
    while True:
        while i + 1 < n and P[i + 1] == P[i] + 1:
            i += 1
        if i + 1 >= n:
            break
        if P[i + 1] <= P[i]:
            raise IntervalError("partial cells must be strictly ascending")
        c, nxt = P[i] + 1, P[i + 1]
        t = check_neighbors(c, P, F, g) if use_neighbors else GapType.UNKNOWN
        if t is GapType.UNKNOWN:
            tests += 1
            loc = point_in_polygon(g.cell_center(hilbert_coords(c, g.order)), poly)
            t = GapType.EMPTY if loc is Location.OUTSIDE else GapType.FULL
        if t is GapType.FULL:
            F.append(c)
            F.append(nxt)
        else:
            A.append(a_start)
            A.append(c)
            a_start = nxt
        i += 1
    A.append(a_start)
    A.append(P[-1] + 1)
    if stats is not None:
        stats["pip_tests"] = stats.get("pip_tests", 0) + tests
    Fl = IntervalList(F, validate=False)
    if covered:
        Fl = merge_intervals(Fl, cells_to_intervals(covered))
    return IntervalList(A, validate=False), Fl
