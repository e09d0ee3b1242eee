"""A 2^N x 2^N raster over a rectangular extent with Hilbert-ordered cells.

Cell (col, row) has its lower-left corner at
``(xmin + col * cell_w, ymin + row * cell_h)``; row 0 is the bottom row.
The curve starts at (0, 0) and its first four cells are
(0,0) -> (0,1) -> (1,1) -> (1,0). Coarser orders are nested: the id of a
cell at order L is the id of any of its descendants at order N shifted
right by 2*(N-L) bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geom import Mbr, Point

MAX_ORDER = 16
# relative slack added around dataset MBRs so max-coordinate points land in the last cell
EXTENT_SLACK = 1e-9


class GridError(ValueError):
    pass


class CellCoord(NamedTuple):
    col: int
    row: int


@dataclass(frozen=True)
class GridConfig:
    order: int
    extent: Mbr
    cell_w: float = field(init=False, repr=False, compare=False)
    cell_h: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.order <= MAX_ORDER:
            raise GridError(f"order must be in [1, {MAX_ORDER}], got {self.order}")
        ext = Mbr(*map(float, self.extent))
        object.__setattr__(self, "extent", ext)
        side = 1 << self.order
        object.__setattr__(self, "cell_w", ext.width / side)
        object.__setattr__(self, "cell_h", ext.height / side)
        if not (self.cell_w > 0 and self.cell_h > 0):
            raise GridError(f"degenerate grid extent {ext}")

    @property
    def side(self) -> int:
        return 1 << self.order

    @property
    def num_cells(self) -> int:
        return 1 << (2 * self.order)

    def with_order(self, order: int) -> "GridConfig":
        return GridConfig(order, self.extent)

    def to_grid(self, x: float, y: float) -> tuple[float, float]:
        """World coordinates to continuous grid units (cells are unit squares)."""
        e = self.extent
        return (x - e.xmin) / self.cell_w, (y - e.ymin) / self.cell_h

    def cell_center(self, c: CellCoord) -> Point:
        e = self.extent
        return Point(e.xmin + (c[0] + 0.5) * self.cell_w, e.ymin + (c[1] + 0.5) * self.cell_h)


def hilbert_index(c: CellCoord | tuple[int, int], order: int) -> int:
    col, row = c
    n = 1 << order
    if not (0 <= col < n and 0 <= row < n):
        raise GridError(f"cell {tuple(c)} outside a {n}x{n} grid")
    x, y = int(col), int(row)
    d = 0
    s = n >> 1
    while s:
        rx = 1 if x & s else 0
        ry = 1 if y & s else 0
        d += s * s * ((3 * rx) ^ ry)
        if ry == 0:
            if rx == 1:
                x = n - 1 - x
                y = n - 1 - y
            x, y = y, x
        s >>= 1
    return d


def hilbert_coords(cell_id: int, order: int) -> CellCoord:
    n = 1 << order
    if not 0 <= cell_id < n * n:
        raise GridError(f"cell id {cell_id} outside [0, 4^{order})")
    t = int(cell_id)
    x = y = 0
    s = 1
    while s < n:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t >>= 2
        s <<= 1
    return CellCoord(x, y)


def hilbert_index_array(cols, rows, order: int) -> np.ndarray:
    """Vectorized :func:`hilbert_index` over integer arrays (no range check)."""
    x = np.asarray(cols, dtype=np.int64).copy()
    y = np.asarray(rows, dtype=np.int64).copy()
    d = np.zeros(x.shape, dtype=np.int64)
    n = 1 << order
    s = n >> 1
    while s:
        rx = (x & s) > 0
        ry = (y & s) > 0
        d += (s * s) * ((3 * rx.astype(np.int64)) ^ ry.astype(np.int64))
        flip = ~ry & rx
        x = np.where(flip, n - 1 - x, x)
        y = np.where(flip, n - 1 - y, y)
        swap = ~ry
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        s >>= 1
    return d


def hilbert_coords_array(ids, order: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(ids, dtype=np.int64).copy()
    x = np.zeros(t.shape, dtype=np.int64)
    y = np.zeros(t.shape, dtype=np.int64)
    s = 1
    n = 1 << order
    while s < n:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, s - 1 - x, x)
        y = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        x += s * rx
        y += s * ry
        t >>= 2
        s <<= 1
    return x, y


def grid_for_extent(objects_mbr: Mbr, order: int) -> GridConfig:
    """Grid over ``objects_mbr`` grown by a tiny relative slack on every side."""
    w, h = objects_mbr.width, objects_mbr.height
    if not (w > 0 and h > 0):
        raise GridError(f"degenerate extent {tuple(objects_mbr)}")
    dx = max(w, abs(objects_mbr.xmin), abs(objects_mbr.xmax)) * EXTENT_SLACK
    dy = max(h, abs(objects_mbr.ymin), abs(objects_mbr.ymax)) * EXTENT_SLACK
    return GridConfig(order, Mbr(objects_mbr.xmin - dx, objects_mbr.ymin - dy,
                                 objects_mbr.xmax + dx, objects_mbr.ymax + dy))


def point_to_cell(p, g: GridConfig) -> CellCoord:
    e = g.extent
    if not (e.xmin <= p[0] <= e.xmax and e.ymin <= p[1] <= e.ymax):
        raise GridError(f"point {tuple(p)} outside grid extent {tuple(e)}")
    gx, gy = g.to_grid(p[0], p[1])
    last = g.side - 1
    return CellCoord(min(max(math.floor(gx), 0), last), min(max(math.floor(gy), 0), last))


def cell_box(c: CellCoord | tuple[int, int], g: GridConfig) -> Mbr:
    e = g.extent
    x0 = e.xmin + c[0] * g.cell_w
    y0 = e.ymin + c[1] * g.cell_h
    return Mbr(x0, y0, x0 + g.cell_w, y0 + g.cell_h)
