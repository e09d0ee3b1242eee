"""Line-oriented WKT input: one geometry per line, with an optional ``id;`` prefix.

Only POLYGON (outer ring kept, holes dropped) and LINESTRING are accepted.
Other geometry types and degenerate shapes are skipped and counted, so a
dirty input file still loads.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .geom import GeometryError, Linestring, SimplePolygon

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_TAG = re.compile(r"\s*([A-Za-z]+)(?:\s+(Z|M|ZM))?\s*", re.IGNORECASE)
_NUMBER = re.compile(_NUM)


class WktError(ValueError):
    def __init__(self, msg: str, lineno: int | None = None):
        super().__init__(msg if lineno is None else f"line {lineno}: {msg}")
        self.lineno = lineno


class Unsupported(Exception):
    pass


def _coords(text: str, dims: int) -> list[tuple[float, float]]:
    pts = []
    for chunk in text.split(","):
        nums = chunk.split()
        if len(nums) != dims or not all(_NUMBER.fullmatch(n) for n in nums):
            raise WktError(f"bad coordinate {chunk.strip()!r}")
        pts.append((float(nums[0]), float(nums[1])))
    return pts


def _groups(body: str) -> list[str]:
    """Split ``(a), (b), ...`` into the contents of each parenthesised group."""
    out = []
    depth = 0
    start = None
    for k, ch in enumerate(body):
        if ch == "(":
            if depth == 0:
                start = k + 1
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise WktError("unbalanced parentheses")
            if depth == 0:
                out.append(body[start:k])
        elif depth == 0 and not (ch.isspace() or ch == ","):
            raise WktError(f"unexpected {ch!r}")
    if depth:
        raise WktError("unbalanced parentheses")
    return out


def parse_geometry(text: str) -> SimplePolygon | Linestring:
    m = _TAG.match(text)
    if not m:
        raise WktError("missing geometry type")
    kind = m.group(1).upper()
    dims = 2 + len(m.group(2) or "")
    rest = text[m.end():].strip()
    if rest.upper() == "EMPTY":
        raise Unsupported(f"{kind} EMPTY")
    if kind not in ("POLYGON", "LINESTRING"):
        if kind in ("POINT", "MULTIPOINT", "MULTILINESTRING", "MULTIPOLYGON", "GEOMETRYCOLLECTION",
                    "TRIANGLE", "TIN", "POLYHEDRALSURFACE", "CIRCULARSTRING", "CURVEPOLYGON"):
            raise Unsupported(kind)
        raise WktError(f"unknown geometry type {m.group(1)!r}")
    if not (rest.startswith("(") and rest.endswith(")")):
        raise WktError(f"{kind} body must be parenthesised")
    if kind == "LINESTRING":
        return Linestring(_coords(rest[1:-1], dims))
    rings = _groups(rest[1:-1])
    if not rings:
        raise WktError("POLYGON without rings")
    return SimplePolygon(_coords(rings[0], dims))


def parse_line(line: str) -> tuple[int | None, SimplePolygon | Linestring]:
    head, sep, tail = line.partition(";")
    oid = None
    if sep:
        try:
            oid = int(head)
        except ValueError:
            raise WktError(f"id prefix {head.strip()!r} is not an integer") from None
        if oid < 0 or oid >= 1 << 32:
            raise WktError(f"id {oid} does not fit in 32 bits")
        line = tail
    return oid, parse_geometry(line.strip())


@dataclass
class LoadResult:
    objects: list[tuple[int, SimplePolygon | Linestring]] = field(default_factory=list)
    skipped: Counter = field(default_factory=Counter)

    @property
    def num_skipped(self) -> int:
        return sum(self.skipped.values())


def load_lines(lines: Iterable[str]) -> LoadResult:
    """Parse WKT lines. Lines without an id prefix get their 0-based line
    number as id. Blank lines and ``#`` comments are ignored."""
    res = LoadResult()
    seen: set[int] = set()
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            oid, geom = parse_line(s)
        except Unsupported as exc:
            res.skipped[str(exc).split()[0]] += 1
            continue
        except GeometryError:
            res.skipped["invalid"] += 1
            continue
        except ValueError as exc:
            raise WktError(str(exc), lineno) from None
        if oid is None:
            oid = lineno - 1
        if oid in seen:
            raise WktError(f"duplicate id {oid}", lineno)
        seen.add(oid)
        res.objects.append((oid, geom))
    return res


def load_file(path: str) -> LoadResult:
    with open(path, encoding="utf-8") as f:
        return load_lines(f)


def polygon_to_wkt(p: SimplePolygon) -> str:
    ring = list(p.ring) + [p.ring[0]]
    return "POLYGON ((" + ", ".join(f"{x!r} {y!r}" for x, y in ring) + "))"


def linestring_to_wkt(ls: Linestring) -> str:
    return "LINESTRING (" + ", ".join(f"{x!r} {y!r}" for x, y in ls.vertices) + ")"


def to_wkt(geom: SimplePolygon | Linestring) -> str:
    return polygon_to_wkt(geom) if isinstance(geom, SimplePolygon) else linestring_to_wkt(geom)
