"""Brute-force references for testing: per-cell classification by clipping,
all-pairs exact joins and a recursive Hilbert curve generator.

Nothing here shares code with the rasterization or curve modules it is
used to check; only the geometry predicates are reused by the exact join.
"""
from __future__ import annotations

import enum
import math
from functools import lru_cache

from .geom import Predicate, SimplePolygon, polygon_linestring_intersect, polygon_within, \
    polygons_intersect

# must match the contact tolerance used by the rasterizer (grid units)
CONTACT_EPS = 1e-9
# a touched cell counts as covered when its clipped area reaches 1 - COVER_TOL
COVER_TOL = 1e-9


class OracleClass(enum.Enum):
    FULL = "full"
    STRONG = "strong"
    WEAK = "weak"
    EMPTY = "empty"


def _clip(poly: list, inside, cut) -> list:
    out = []
    if not poly:
        return out
    s = poly[-1]
    for e in poly:
        if inside(e):
            if not inside(s):
                out.append(cut(s, e))
            out.append(e)
        elif inside(s):
            out.append(cut(s, e))
        s = e
    return out


def _cut_x(x):
    def cut(s, e):
        t = (x - s[0]) / (e[0] - s[0])
        return (x, s[1] + t * (e[1] - s[1]))
    return cut


def _cut_y(y):
    def cut(s, e):
        t = (y - s[1]) / (e[1] - s[1])
        return (s[0] + t * (e[0] - s[0]), y)
    return cut


def clip_to_box(ring: list, x0: float, y0: float, x1: float, y1: float) -> list:
    """Sutherland-Hodgman clipping of a ring against an axis-aligned box."""
    p = _clip(ring, lambda q: q[0] >= x0, _cut_x(x0))
    p = _clip(p, lambda q: q[0] <= x1, _cut_x(x1))
    p = _clip(p, lambda q: q[1] >= y0, _cut_y(y0))
    return _clip(p, lambda q: q[1] <= y1, _cut_y(y1))


def shoelace(ring: list) -> float:
    return abs(sum(ring[k - 1][0] * ring[k][1] - ring[k][0] * ring[k - 1][1]
                   for k in range(len(ring)))) / 2.0


def segment_meets_box(p, q, x0, y0, x1, y1) -> bool:
    """Liang-Barsky: does the closed segment p-q meet the closed box?"""
    t0, t1 = 0.0, 1.0
    dx, dy = q[0] - p[0], q[1] - p[1]
    for den, num in ((-dx, p[0] - x0), (dx, x1 - p[0]), (-dy, p[1] - y0), (dy, y1 - p[1])):
        if den == 0.0:
            if num < 0.0:
                return False
            continue
        t = num / den
        if den < 0.0:
            if t > t1:
                return False
            t0 = max(t0, t)
        else:
            if t < t0:
                return False
            t1 = min(t1, t)
    return t0 <= t1


def _grid_ring(geom, g) -> list:
    e = g.extent
    w = (e.xmax - e.xmin) / (1 << g.order)
    h = (e.ymax - e.ymin) / (1 << g.order)
    pts = geom.ring if isinstance(geom, SimplePolygon) else geom.vertices
    return [((x - e.xmin) / w, (y - e.ymin) / h) for x, y in pts]


def _candidate_window(ring, side):
    xs = [p[0] for p in ring]
    ys = [p[1] for p in ring]
    lo_c = max(int(math.floor(min(xs))) - 1, 0)
    lo_r = max(int(math.floor(min(ys))) - 1, 0)
    hi_c = min(int(math.floor(max(xs))) + 1, side - 1)
    hi_r = min(int(math.floor(max(ys))) + 1, side - 1)
    return lo_c, lo_r, hi_c, hi_r


def brute_classify(poly: SimplePolygon, g) -> dict[tuple[int, int], OracleClass]:
    """Class of every non-empty cell, keyed by (col, row).

    Classes follow the clipped coverage: Full at 100%, Strong above 50%
    (by more than COVER_TOL, so an exact half is Weak),
    Weak otherwise. A cell some polygon edge meets (box grown by
    CONTACT_EPS) is non-empty even at zero coverage, and is Full only if
    no edge reaches its interior (box shrunk by CONTACT_EPS). An untouched
    cell is Full when covered and Empty otherwise. Cells outside the
    polygon MBR (plus one cell of margin) cannot be touched or covered and
    are skipped; missing keys mean Empty.
    """
    side = 1 << g.order
    ring = _grid_ring(poly, g)
    edges = [(ring[k - 1], ring[k]) for k in range(len(ring))]
    lo_c, lo_r, hi_c, hi_r = _candidate_window(ring, side)
    out = {}
    for j in range(lo_r, hi_r + 1):
        for i in range(lo_c, hi_c + 1):
            bx0, by0, bx1, by1 = i - CONTACT_EPS, j - CONTACT_EPS, i + 1 + CONTACT_EPS, j + 1 + CONTACT_EPS
            touched = any(segment_meets_box(p, q, bx0, by0, bx1, by1) for p, q in edges)
            piece = clip_to_box(ring, i, j, i + 1, j + 1)
            cover = shoelace(piece) if len(piece) >= 3 else 0.0
            if touched:
                # a covered cell may still be nicked by an edge entering it
                # by less than COVER_TOL of area; probe the shrunk interior
                entered = any(segment_meets_box(p, q, i + CONTACT_EPS, j + CONTACT_EPS,
                                                i + 1 - CONTACT_EPS, j + 1 - CONTACT_EPS)
                              for p, q in edges)
                if cover >= 1.0 - COVER_TOL and not entered:
                    out[(i, j)] = OracleClass.FULL
                else:
                    out[(i, j)] = OracleClass.STRONG if cover > 0.5 + COVER_TOL else OracleClass.WEAK
            elif cover > 0.5:
                out[(i, j)] = OracleClass.FULL
    return out


def brute_linestring_cells(ls, g) -> set[tuple[int, int]]:
    side = 1 << g.order
    pts = _grid_ring(ls, g)
    edges = list(zip(pts, pts[1:]))
    lo_c, lo_r, hi_c, hi_r = _candidate_window(pts, side)
    out = set()
    for j in range(lo_r, hi_r + 1):
        for i in range(lo_c, hi_c + 1):
            if any(segment_meets_box(p, q, i - CONTACT_EPS, j - CONTACT_EPS,
                                     i + 1 + CONTACT_EPS, j + 1 + CONTACT_EPS) for p, q in edges):
                out.add((i, j))
    return out


def two_class(cls: OracleClass) -> str:
    return "full" if cls is OracleClass.FULL else "partial"


def naive_join(R, S, predicate="intersects") -> set[tuple[int, int]]:
    """All-pairs exact join of (id, geometry) collections."""
    pred = str(getattr(predicate, "value", predicate))
    out = set()
    for rid, r in R:
        for sid, s in S:
            if pred == Predicate.WITHIN.value:
                hit = polygon_within(r, s)
            elif pred == "polyline":
                hit = polygon_linestring_intersect(r, s)
            else:
                hit = polygons_intersect(r, s)
            if hit:
                out.add((rid, sid))
    return out


def naive_selection(query: SimplePolygon, D) -> set[int]:
    return {oid for oid, geom in D if polygons_intersect(query, geom)}


@lru_cache(maxsize=None)
def hilbert_reference(order: int) -> dict[tuple[int, int], int]:
    """(col, row) -> curve position, built by quadrant substitution.

    The order-1 pattern visits (0,0), (0,1), (1,1), (1,0). Each doubling
    step lays four copies of the current curve into the quadrants of the
    larger grid, reflected so that consecutive copies join up.
    """
    if not 1 <= order <= 10:
        raise ValueError("reference construction limited to orders 1..10")
    path = [(0, 0), (0, 1), (1, 1), (1, 0)]
    size = 2
    for _ in range(order - 1):
        s = size
        # lower-left: transpose; upper-left and upper-right: translate;
        # lower-right: anti-transpose
        ll = [(y, x) for x, y in path]
        ul = [(x, y + s) for x, y in path]
        ur = [(x + s, y + s) for x, y in path]
        lr = [(2 * s - 1 - y, s - 1 - x) for x, y in path]
        path = ll + ul + ur + lr
        size *= 2
    return {cell: k for k, cell in enumerate(path)}
