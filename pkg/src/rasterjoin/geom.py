"""Exact geometry kernel: points, MBRs, simple polygons, linestrings and the
predicates used by rasterization and refinement.

All predicates use closed-set semantics: touching boundaries count as a
common point. Collinearity is decided with a small relative tolerance.
"""
from __future__ import annotations

import enum
import math
from typing import Iterable, Iterator, NamedTuple, Sequence

# relative tolerance for orientation / on-segment tests
EPS = 1e-12


class GeometryError(ValueError):
    """Raised for invalid (degenerate, non-simple, non-finite) geometries."""


class Point(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point
    b: Point


class Mbr(NamedTuple):
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @classmethod
    def of_points(cls, pts: Iterable[Sequence[float]]) -> "Mbr":
        xs, ys = zip(*pts)
        return cls(min(xs), min(ys), max(xs), max(ys))

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def union(self, other: "Mbr") -> "Mbr":
        return Mbr(min(self.xmin, other.xmin), min(self.ymin, other.ymin),
                   max(self.xmax, other.xmax), max(self.ymax, other.ymax))

    def intersection(self, other: "Mbr") -> "Mbr | None":
        xmin = max(self.xmin, other.xmin)
        ymin = max(self.ymin, other.ymin)
        xmax = min(self.xmax, other.xmax)
        ymax = min(self.ymax, other.ymax)
        if xmin > xmax or ymin > ymax:
            return None
        return Mbr(xmin, ymin, xmax, ymax)

    def intersects(self, other: "Mbr") -> bool:
        return (self.xmin <= other.xmax and other.xmin <= self.xmax
                and self.ymin <= other.ymax and other.ymin <= self.ymax)

    def within(self, other: "Mbr") -> bool:
        return (other.xmin <= self.xmin and self.xmax <= other.xmax
                and other.ymin <= self.ymin and self.ymax <= other.ymax)


def union_mbr(mbrs: Iterable[Mbr]) -> Mbr:
    it = iter(mbrs)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("union of an empty MBR collection") from None
    for m in it:
        acc = acc.union(m)
    return acc


class Location(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


class Predicate(enum.Enum):
    INTERSECTS = "intersects"
    WITHIN = "within"


def _clean_ring(coords: Iterable[Sequence[float]]) -> list[Point]:
    ring: list[Point] = []
    for c in coords:
        x, y = float(c[0]), float(c[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"non-finite coordinate ({x}, {y})")
        p = Point(x, y)
        if not ring or ring[-1] != p:
            ring.append(p)
    return ring


def ring_area(ring: Sequence[Point]) -> float:
    """Signed shoelace area (positive for counter-clockwise rings)."""
    s = 0.0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s / 2.0


class SimplePolygon:
    """A polygon without holes given by its outer ring (implicitly closed).

    The constructor drops repeated consecutive vertices and the closing
    vertex, and rejects rings with fewer than three distinct vertices or
    zero area. Pass ``check_simple=True`` to also reject self-intersecting
    rings (quadratic in the vertex count).
    """

    __slots__ = ("ring", "mbr")

    def __init__(self, coords: Iterable[Sequence[float]], check_simple: bool = False):
        ring = _clean_ring(coords)
        if len(ring) > 1 and ring[0] == ring[-1]:
            ring.pop()
        if len(set(ring)) < 3:
            raise GeometryError("polygon needs at least 3 distinct vertices")
        if ring_area(ring) == 0.0:
            raise GeometryError("polygon has zero area")
        self.ring: tuple[Point, ...] = tuple(ring)
        self.mbr = Mbr.of_points(self.ring)
        if check_simple and not ring_is_simple(self.ring):
            raise GeometryError("polygon ring self-intersects")

    def edges(self) -> Iterator[Segment]:
        ring = self.ring
        n = len(ring)
        for i in range(n):
            yield Segment(ring[i], ring[(i + 1) % n])

    def area(self) -> float:
        return abs(ring_area(self.ring))

    def __len__(self) -> int:
        return len(self.ring)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SimplePolygon) and self.ring == other.ring

    def __hash__(self) -> int:
        return hash(self.ring)

    def __repr__(self) -> str:
        return f"SimplePolygon({[tuple(p) for p in self.ring]!r})"


class Linestring:
    __slots__ = ("vertices", "mbr")

    def __init__(self, coords: Iterable[Sequence[float]]):
        verts = _clean_ring(coords)
        if len(verts) < 2:
            raise GeometryError("linestring needs at least 2 distinct vertices")
        self.vertices: tuple[Point, ...] = tuple(verts)
        self.mbr = Mbr.of_points(self.vertices)

    def edges(self) -> Iterator[Segment]:
        v = self.vertices
        for i in range(len(v) - 1):
            yield Segment(v[i], v[i + 1])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Linestring) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        return f"Linestring({[tuple(p) for p in self.vertices]!r})"


# ---------------------------------------------------------------------------
# primitive predicates


def orient(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> int:
    """Sign of the turn a->b->c: 1 left, -1 right, 0 collinear (within EPS)."""
    abx, aby = b[0] - a[0], b[1] - a[1]
    acx, acy = c[0] - a[0], c[1] - a[1]
    cross = abx * acy - aby * acx
    tol = EPS * math.hypot(abx, aby) * math.hypot(acx, acy)
    if cross > tol:
        return 1
    if cross < -tol:
        return -1
    return 0


def _in_box(a, b, p) -> bool:
    tx = EPS * (abs(a[0]) + abs(b[0]) + 1.0)
    ty = EPS * (abs(a[1]) + abs(b[1]) + 1.0)
    return (min(a[0], b[0]) - tx <= p[0] <= max(a[0], b[0]) + tx
            and min(a[1], b[1]) - ty <= p[1] <= max(a[1], b[1]) + ty)


def point_on_segment(p, a, b) -> bool:
    return orient(a, b, p) == 0 and _in_box(a, b, p)


def _seg_intersect(p1, p2, q1, q2) -> bool:
    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    return ((d1 == 0 and _in_box(q1, q2, p1)) or (d2 == 0 and _in_box(q1, q2, p2))
            or (d3 == 0 and _in_box(p1, p2, q1)) or (d4 == 0 and _in_box(p1, p2, q2)))


def segments_intersect(s1: Segment, s2: Segment) -> bool:
    """True iff the closed segments share at least one point."""
    (p1, p2), (q1, q2) = s1, s2
    if (max(p1[0], p2[0]) < min(q1[0], q2[0]) or max(q1[0], q2[0]) < min(p1[0], p2[0])
            or max(p1[1], p2[1]) < min(q1[1], q2[1]) or max(q1[1], q2[1]) < min(p1[1], p2[1])):
        return False
    return _seg_intersect(p1, p2, q1, q2)


def crossing_inside(x: float, y: float, ring: Sequence[Point]) -> bool:
    """Even-odd ray casting without boundary detection.

    The ray points in +x. An edge counts when exactly one of its endpoints
    lies strictly below the ray, so vertices on the ray are counted once.
    """
    inside = False
    n = len(ring)
    x0, y0 = ring[n - 1]
    for i in range(n):
        x1, y1 = ring[i]
        if (y0 < y) != (y1 < y):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x < xi:
                inside = not inside
        x0, y0 = x1, y1
    return inside


def point_in_polygon(p: Sequence[float], poly: SimplePolygon) -> Location:
    ring = poly.ring
    n = len(ring)
    for i in range(n):
        if point_on_segment(p, ring[i], ring[(i + 1) % n]):
            return Location.BOUNDARY
    return Location.INSIDE if crossing_inside(p[0], p[1], ring) else Location.OUTSIDE


def _covers(p, poly: SimplePolygon) -> bool:
    return point_in_polygon(p, poly) is not Location.OUTSIDE


def mbr_relate(a: Mbr, b: Mbr, predicate: Predicate = Predicate.INTERSECTS) -> bool:
    if predicate is Predicate.WITHIN:
        return a.within(b)
    return a.intersects(b)


def _edges_near(edges: Sequence[Segment], box: Mbr) -> list[Segment]:
    out = []
    for e in edges:
        (ax, ay), (bx, by) = e
        if (min(ax, bx) <= box.xmax and box.xmin <= max(ax, bx)
                and min(ay, by) <= box.ymax and box.ymin <= max(ay, by)):
            out.append(e)
    return out


def _any_edge_pair_intersects(ea: Sequence[Segment], eb: Sequence[Segment]) -> bool:
    # sweep on x to avoid the full quadratic product on larger rings
    evs = sorted(((min(s[0][0], s[1][0]), max(s[0][0], s[1][0]), k, s)
                  for k, edges in ((0, ea), (1, eb)) for s in edges),
                 key=lambda t: t[0])
    active: list[list] = [[], []]
    for xlo, xhi, k, s in evs:
        other = active[1 - k]
        keep = []
        for item in other:
            if item[0] >= xlo:
                keep.append(item)
                if segments_intersect(s, item[1]):
                    return True
        active[1 - k] = keep
        active[k].append((xhi, s))
    return False


def polygons_intersect(r: SimplePolygon, s: SimplePolygon) -> bool:
    common = r.mbr.intersection(s.mbr)
    if common is None:
        return False
    er = _edges_near(list(r.edges()), common)
    es = _edges_near(list(s.edges()), common)
    if er and es and _any_edge_pair_intersects(er, es):
        return True
    # no boundary contact: either disjoint or one contains the other
    return (crossing_inside(r.ring[0][0], r.ring[0][1], s.ring)
            or crossing_inside(s.ring[0][0], s.ring[0][1], r.ring))


def _split_params(a: Point, b: Point, others: Sequence[Segment]) -> list[float]:
    """Parameters along a->b where it meets any of ``others`` (plus 0 and 1)."""
    ts = [0.0, 1.0]
    dx, dy = b[0] - a[0], b[1] - a[1]
    ll = dx * dx + dy * dy
    for q1, q2 in others:
        if not segments_intersect((a, b), (q1, q2)):
            continue
        ex, ey = q2[0] - q1[0], q2[1] - q1[1]
        den = dx * ey - dy * ex
        if orient(a, b, q1) == 0 and orient(a, b, q2) == 0:
            # collinear overlap: both endpoints of q projected onto a->b
            for q in (q1, q2):
                t = ((q[0] - a[0]) * dx + (q[1] - a[1]) * dy) / ll
                if 0.0 < t < 1.0:
                    ts.append(t)
        elif den != 0.0:
            t = ((q1[0] - a[0]) * ey - (q1[1] - a[1]) * ex) / den
            if 0.0 < t < 1.0:
                ts.append(t)
    ts.sort()
    return ts


def polygon_within(r: SimplePolygon, s: SimplePolygon) -> bool:
    """True iff r is completely covered by s (boundaries may touch).

    Each edge of r is split at every contact with the boundary of s and the
    midpoint of every piece must be covered by s. Since s has no holes,
    a covered boundary implies a covered interior.
    """
    if not r.mbr.within(s.mbr):
        return False
    es = list(s.edges())
    for v in r.ring:
        if not _covers(v, s):
            return False
    for a, b in r.edges():
        near = _edges_near(es, Mbr(min(a[0], b[0]), min(a[1], b[1]),
                                   max(a[0], b[0]), max(a[1], b[1])))
        if not near:
            continue
        ts = _split_params(a, b, near)
        for t0, t1 in zip(ts, ts[1:]):
            if t1 - t0 <= 0.0:
                continue
            tm = (t0 + t1) / 2.0
            m = (a[0] + tm * (b[0] - a[0]), a[1] + tm * (b[1] - a[1]))
            if not _covers(m, s):
                return False
    return True


def polygon_linestring_intersect(poly: SimplePolygon, ls: Linestring) -> bool:
    common = poly.mbr.intersection(ls.mbr)
    if common is None:
        return False
    ep = _edges_near(list(poly.edges()), common)
    el = _edges_near(list(ls.edges()), common)
    if ep and el and _any_edge_pair_intersects(ep, el):
        return True
    v = ls.vertices[0]
    return crossing_inside(v[0], v[1], poly.ring)


def ring_is_simple(ring: Sequence[Point]) -> bool:
    """True iff no two non-adjacent edges of the closed ring touch and no
    two adjacent edges fold back onto each other."""
    n = len(ring)
    edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    order = sorted(range(n), key=lambda i: min(edges[i][0][0], edges[i][1][0]))
    for pos, i in enumerate(order):
        a, b = edges[i]
        xhi = max(a[0], b[0])
        for j in order[pos + 1:]:
            c, d = edges[j]
            if min(c[0], d[0]) > xhi:
                break
            if (j - i) % n in (1, n - 1):
                shared = b if b in (c, d) else a
                mine = a if shared == b else b
                other = d if c == shared else c
                if orient(shared, mine, other) == 0 and (
                        (other[0] - shared[0]) * (mine[0] - shared[0])
                        + (other[1] - shared[1]) * (mine[1] - shared[1])) > 0:
                    return False
                continue
            if segments_intersect(edges[i], edges[j]):
                return False
    return True
