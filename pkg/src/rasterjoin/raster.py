"""Polygon and linestring rasterization on a Hilbert grid.

Boundary cells come from a supercover DDA traversal of every edge: a cell
is touched when its closed box, grown by ``DDA_EPS`` grid units, meets the
geometry boundary. A touched cell whose open interior the boundary never
enters is either fully covered (then it is Full) or meets the polygon in a
zero-area set (then it stays Partial). The remaining Full cells lie inside
the polygon away from the boundary and are found either by a scanline fill
(no point-in-polygon tests) or by a flood fill seeded with one
point-in-polygon test per connected region.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geom import Linestring, Location, SimplePolygon, point_in_polygon
from .grid import GridConfig, GridError, hilbert_coords_array, hilbert_index_array

# cell boxes are grown by this many grid units before the boundary contact test
DDA_EPS = 1e-9
# Strong needs coverage above one half by more than rounding noise; a cell
# at exactly 50% is Weak, and Weak never proves a hit
STRONG_EPS = 1e-9


class CellClass(enum.Enum):
    FULL = "full"
    PARTIAL = "partial"
    EMPTY = "empty"


class TriClass(enum.Enum):
    FULL = "full"
    STRONG = "strong"
    WEAK = "weak"


class Backend(enum.Enum):
    SCANLINE = "scanline"
    FLOODFILL = "floodfill"
    ONESTEP = "onestep"


@dataclass(frozen=True)
class RasterCells:
    partial: list[int]
    full: list[int]


def _check_inside(geom, g: GridConfig) -> None:
    m, e = geom.mbr, g.extent
    if not (e.xmin <= m.xmin and m.xmax <= e.xmax and e.ymin <= m.ymin and m.ymax <= e.ymax):
        raise GridError(f"geometry MBR {tuple(m)} not inside grid extent {tuple(e)}")


def grid_vertices(geom, g: GridConfig) -> list[tuple[float, float]]:
    pts = geom.ring if isinstance(geom, SimplePolygon) else geom.vertices
    return [g.to_grid(x, y) for x, y in pts]


def _grid_segments(geom, g: GridConfig):
    v = grid_vertices(geom, g)
    if isinstance(geom, SimplePolygon):
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
    return list(zip(v, v[1:]))


def _index_range(lo: float, hi: float, last: int) -> range:
    """Integer cells k with [k, k+1] grown by DDA_EPS meeting [lo, hi]."""
    a = max(math.ceil(lo - 1.0 - DDA_EPS), 0)
    b = min(math.floor(hi + DDA_EPS), last)
    return range(a, b + 1)


def _open_range(lo: float, hi: float, last: int) -> range:
    """Integer cells k whose open interval (k, k+1) meets [lo, hi]."""
    return range(max(math.floor(lo), 0), min(math.ceil(hi) - 1, last) + 1)


def segment_cells(p, q, side: int, out: set, entered: set | None = None) -> None:
    """Add every (col, row) touched by segment p-q (grid units) to ``out``.

    Steps column by column; within each column the y-extent of the clipped
    segment gives the touched rows. Endpoints are canonically ordered so a
    shared edge yields identical cells in both of its polygons. When
    ``entered`` is given, cells whose open interior the segment crosses
    are added to it as well.
    """
    if (q[0], q[1]) < (p[0], p[1]):
        p, q = q, p
    x0, y0 = p
    x1, y1 = q
    last = side - 1
    if x0 == x1:
        ylo, yhi = min(y0, y1), max(y0, y1)
        rows = _index_range(ylo, yhi, last)
        for i in _index_range(x0, x0, last):
            for j in rows:
                out.add((i, j))
        if entered is not None:
            for i in _open_range(x0, x0, last):
                for j in _open_range(ylo, yhi, last):
                    entered.add((i, j))
        return
    slope = (y1 - y0) / (x1 - x0)
    for i in _index_range(x0, x1, last):
        xa = i - DDA_EPS
        xb = i + 1 + DDA_EPS
        ya = y0 if xa <= x0 else y0 + (xa - x0) * slope
        yb = y1 if xb >= x1 else y0 + (xb - x0) * slope
        lo, hi = (ya, yb) if ya <= yb else (yb, ya)
        for j in _index_range(lo, hi, last):
            out.add((i, j))
    if entered is None:
        return
    for i in _open_range(x0, x1, last):
        ya = y0 if i <= x0 else y0 + (i - x0) * slope
        yb = y1 if i + 1 >= x1 else y0 + (i + 1 - x0) * slope
        lo, hi = (ya, yb) if ya <= yb else (yb, ya)
        for j in _open_range(lo, hi, last):
            entered.add((i, j))


def _boundary_coords(geom, g: GridConfig, entered: set | None = None) -> set[tuple[int, int]]:
    cells: set[tuple[int, int]] = set()
    side = g.side
    for p, q in _grid_segments(geom, g):
        segment_cells(p, q, side, cells, entered)
    return cells


def _to_ids(coords: Iterable[tuple[int, int]], order: int) -> list[int]:
    coords = list(coords)
    if not coords:
        return []
    cols, rows = zip(*coords)
    ids = hilbert_index_array(cols, rows, order)
    ids.sort()
    return ids.tolist()


def dda_partial_cells(geom: SimplePolygon | Linestring, g: GridConfig) -> list[int]:
    """Sorted Hilbert ids of every cell the geometry boundary touches."""
    _check_inside(geom, g)
    return _to_ids(_boundary_coords(geom, g), g.order)


def rasterize_linestring(ls: Linestring, g: GridConfig) -> list[int]:
    return dda_partial_cells(ls, g)


def boundary_cells(poly: SimplePolygon, g: GridConfig,
                   stats: dict | None = None) -> tuple[list[int], list[int]]:
    """(touched, covered): sorted ids of all boundary-touched cells, and of
    those among them that the polygon covers completely.

    A touched cell the boundary never enters lies entirely on one side of
    it, so one point-in-polygon test at its center settles coverage. Such
    cells only arise where edges run along grid lines or through corners.
    """
    _check_inside(poly, g)
    entered: set[tuple[int, int]] = set()
    touched = _boundary_coords(poly, g, entered)
    covered = [c for c in touched - entered
               if point_in_polygon(g.cell_center(c), poly) is Location.INSIDE]
    if stats is not None:
        stats["contact_tests"] = stats.get("contact_tests", 0) + len(touched) - len(entered & touched)
    return _to_ids(touched, g.order), _to_ids(covered, g.order)


def _require_sorted(cells: Sequence[int]) -> None:
    for a, b in zip(cells, cells[1:]):
        if not a < b:
            raise ValueError("partial cell list must be strictly ascending")


def _window(poly: SimplePolygon, g: GridConfig) -> tuple[int, int, int, int]:
    """Inclusive (col0, row0, col1, row1) of the cells covering the polygon MBR."""
    m = poly.mbr
    gx0, gy0 = g.to_grid(m.xmin, m.ymin)
    gx1, gy1 = g.to_grid(m.xmax, m.ymax)
    last = g.side - 1
    c0 = min(max(math.floor(gx0 - DDA_EPS), 0), last)
    r0 = min(max(math.floor(gy0 - DDA_EPS), 0), last)
    c1 = min(max(math.floor(gx1 + DDA_EPS), 0), last)
    r1 = min(max(math.floor(gy1 + DDA_EPS), 0), last)
    return c0, r0, c1, r1


def _partial_mask(partials: Sequence[int], g: GridConfig, win) -> np.ndarray:
    c0, r0, c1, r1 = win
    mask = np.zeros((r1 - r0 + 1, c1 - c0 + 1), dtype=bool)
    if partials:
        cols, rows = hilbert_coords_array(partials, g.order)
        keep = (cols >= c0) & (cols <= c1) & (rows >= r0) & (rows <= r1)
        mask[rows[keep] - r0, cols[keep] - c0] = True
    return mask


def scanline_full_cells(poly: SimplePolygon, g: GridConfig, partials: Sequence[int]) -> list[int]:
    """Full cells by a horizontal scanline through every row's cell centers.

    Event points (edge crossings with the scanline, half-open vertex rule)
    are sorted by x; non-Partial cells whose centers fall between an
    in/out pair of events are Full.
    """
    _require_sorted(partials)
    _check_inside(poly, g)
    win = c0, r0, c1, r1 = _window(poly, g)
    partial = _partial_mask(partials, g, win)
    inside = np.zeros_like(partial)
    v = np.asarray(grid_vertices(poly, g), dtype=float)
    xa, ya = v[:, 0], v[:, 1]
    xb, yb = np.roll(xa, -1), np.roll(ya, -1)
    for j in range(r0, r1 + 1):
        yc = j + 0.5
        hit = (ya < yc) != (yb < yc)
        if not hit.any():
            continue
        x0, y0, x1, y1 = xa[hit], ya[hit], xb[hit], yb[hit]
        events = np.sort(x0 + (yc - y0) * (x1 - x0) / (y1 - y0))
        for k in range(0, len(events) - 1, 2):
            lo = math.floor(events[k] - 0.5) + 1
            hi = math.ceil(events[k + 1] - 0.5) - 1
            lo, hi = max(lo, c0), min(hi, c1)
            if lo <= hi:
                inside[j - r0, lo - c0:hi - c0 + 1] = True
    inside &= ~partial
    rows, cols = np.nonzero(inside)
    if rows.size == 0:
        return []
    ids = hilbert_index_array(cols + c0, rows + r0, g.order)
    ids.sort()
    return ids.tolist()


def floodfill_full_cells(poly: SimplePolygon, g: GridConfig, partials: Sequence[int],
                         stats: dict | None = None) -> list[int]:
    """Full cells by flood filling the MBR window region by region.

    Each unlabeled cell found in row-major order is tested once with a
    point-in-polygon check at its center; its whole 4-connected unlabeled
    region inherits the outcome (Full or Empty).
    """
    _require_sorted(partials)
    _check_inside(poly, g)
    win = c0, r0, c1, r1 = _window(poly, g)
    w = c1 - c0 + 1
    h = r1 - r0 + 1
    mask = _partial_mask(partials, g, win)
    # 0 unlabeled, 1 partial, 2 full, 3 empty
    labels = bytearray(mask.astype(np.uint8).ravel().tobytes())
    tests = 0
    pos = labels.find(0)
    while pos != -1:
        row, col = divmod(pos, w)
        center = g.cell_center((col + c0, row + r0))
        tests += 1
        mark = 3 if point_in_polygon(center, poly) is Location.OUTSIDE else 2
        labels[pos] = mark
        stack = [pos]
        while stack:
            k = stack.pop()
            kr, kc = divmod(k, w)
            if kc > 0 and labels[k - 1] == 0:
                labels[k - 1] = mark
                stack.append(k - 1)
            if kc < w - 1 and labels[k + 1] == 0:
                labels[k + 1] = mark
                stack.append(k + 1)
            if kr > 0 and labels[k - w] == 0:
                labels[k - w] = mark
                stack.append(k - w)
            if kr < h - 1 and labels[k + w] == 0:
                labels[k + w] = mark
                stack.append(k + w)
        pos = labels.find(0, pos + 1)
    if stats is not None:
        stats["pip_tests"] = stats.get("pip_tests", 0) + tests
    full = np.frombuffer(bytes(labels), dtype=np.uint8).reshape(h, w) == 2
    rows, cols = np.nonzero(full)
    if rows.size == 0:
        return []
    ids = hilbert_index_array(cols + c0, rows + r0, g.order)
    ids.sort()
    return ids.tolist()


def rasterize(poly: SimplePolygon, g: GridConfig, backend: Backend | str = Backend.SCANLINE,
              stats: dict | None = None) -> RasterCells:
    backend = Backend(backend)
    touched, covered = boundary_cells(poly, g, stats)
    if backend is Backend.FLOODFILL:
        inner = floodfill_full_cells(poly, g, touched, stats)
    elif backend is Backend.SCANLINE:
        inner = scanline_full_cells(poly, g, touched)
    else:
        raise ValueError("one-step construction yields intervals, not cells; use build_april")
    if not covered:
        return RasterCells(touched, inner)
    drop = set(covered)
    return RasterCells([c for c in touched if c not in drop], sorted(inner + covered))


# ---------------------------------------------------------------------------
# three-class rasterization for RI


def _clip_half(poly: list, axis: int, bound: float, keep_greater: bool) -> list:
    out = []
    n = len(poly)
    if n == 0:
        return out
    prev = poly[-1]
    pin = (prev[axis] >= bound) if keep_greater else (prev[axis] <= bound)
    for cur in poly:
        cin = (cur[axis] >= bound) if keep_greater else (cur[axis] <= bound)
        if cin != pin:
            t = (bound - prev[axis]) / (cur[axis] - prev[axis])
            if axis == 0:
                out.append((bound, prev[1] + t * (cur[1] - prev[1])))
            else:
                out.append((prev[0] + t * (cur[0] - prev[0]), bound))
        if cin:
            out.append(cur)
        prev, pin = cur, cin
    return out


def _area(poly: list) -> float:
    s = 0.0
    n = len(poly)
    for k in range(n):
        x0, y0 = poly[k - 1]
        x1, y1 = poly[k]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def partial_coverage(poly: SimplePolygon, g: GridConfig, cells: Sequence[tuple[int, int]]) -> dict:
    """Covered fraction of each given cell, by clipping row strips then cells."""
    ring = grid_vertices(poly, g)
    by_row: dict[int, list[int]] = {}
    for i, j in cells:
        by_row.setdefault(j, []).append(i)
    cover = {}
    for j, cols in by_row.items():
        strip = _clip_half(_clip_half(ring, 1, j, True), 1, j + 1, False)
        for i in cols:
            piece = _clip_half(_clip_half(strip, 0, i, True), 0, i + 1, False)
            cover[(i, j)] = _area(piece) if len(piece) >= 3 else 0.0
    return cover


def classify_tri(poly: SimplePolygon, g: GridConfig,
                 backend: Backend | str = Backend.SCANLINE) -> list[tuple[int, TriClass]]:
    """Every non-empty cell as Full, Strong (>50% covered) or Weak (<=50%).

    Full cells are exactly the covered ones of ``rasterize``; coverage
    fractions are computed only for the remaining Partial cells.
    """
    backend = Backend(backend)
    if backend is Backend.ONESTEP:
        backend = Backend.SCANLINE
    cells = rasterize(poly, g, backend)
    out = [(c, TriClass.FULL) for c in cells.full]
    if cells.partial:
        cols, rows = hilbert_coords_array(cells.partial, g.order)
        coords = list(zip(cols.tolist(), rows.tolist()))
        cover = partial_coverage(poly, g, coords)
        for cid, xy in zip(cells.partial, coords):
            out.append((cid, TriClass.STRONG if cover[xy] > 0.5 + STRONG_EPS else TriClass.WEAK))
    out.sort(key=lambda t: t[0])
    return out
