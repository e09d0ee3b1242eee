"""Random simple polygons and linestrings for tests, benchmarks and demos."""
from __future__ import annotations

import math

import numpy as np

from .geom import Linestring, Mbr, SimplePolygon


def star_polygon(rng: np.random.Generator, cx: float, cy: float, radius: float,
                 nverts: int = 12, spikiness: float = 0.6) -> SimplePolygon:
    """Star-shaped (hence simple) polygon around (cx, cy) with radius <= ``radius``."""
    while True:
        angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, nverts))
        if np.min(np.diff(np.append(angles, angles[0] + 2 * math.pi))) < 1e-3:
            continue
        radii = radius * (1.0 - spikiness * rng.uniform(0.0, 1.0, nverts))
        pts = [(cx + r * math.cos(a), cy + r * math.sin(a)) for a, r in zip(angles, radii)]
        try:
            return SimplePolygon(pts)
        except ValueError:
            continue


def random_polygons(n: int, extent: Mbr = Mbr(0.0, 0.0, 1.0, 1.0), min_radius: float = 0.005,
                    max_radius: float = 0.05, nverts: tuple[int, int] = (4, 16),
                    seed: int = 0) -> list[tuple[int, SimplePolygon]]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        r = rng.uniform(min_radius, max_radius)
        cx = rng.uniform(extent.xmin + r, extent.xmax - r)
        cy = rng.uniform(extent.ymin + r, extent.ymax - r)
        out.append((k, star_polygon(rng, cx, cy, r, int(rng.integers(nverts[0], nverts[1] + 1)))))
    return out


def random_linestring(rng: np.random.Generator, x: float, y: float, step: float,
                      nverts: int, extent: Mbr) -> Linestring:
    pts = [(x, y)]
    heading = rng.uniform(0.0, 2.0 * math.pi)
    for _ in range(nverts - 1):
        heading += rng.normal(0.0, 0.8)
        d = step * rng.uniform(0.3, 1.0)
        x = min(max(x + d * math.cos(heading), extent.xmin), extent.xmax)
        y = min(max(y + d * math.sin(heading), extent.ymin), extent.ymax)
        if (x, y) != pts[-1]:
            pts.append((x, y))
    if len(pts) < 2:
        pts.append((min(x + step, extent.xmax) if x < extent.xmax else x - step, y))
    return Linestring(pts)


def random_linestrings(n: int, extent: Mbr = Mbr(0.0, 0.0, 1.0, 1.0), step: float = 0.02,
                       nverts: tuple[int, int] = (2, 10), seed: int = 0) -> list[tuple[int, Linestring]]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        x = rng.uniform(extent.xmin, extent.xmax)
        y = rng.uniform(extent.ymin, extent.ymax)
        out.append((k, random_linestring(rng, x, y, step, int(rng.integers(nverts[0], nverts[1] + 1)),
                                         extent)))
    return out
