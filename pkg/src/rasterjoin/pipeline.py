"""Join and selection executor: MBR filter, partitioning, intermediate filter,
refinement and per-phase statistics."""
from __future__ import annotations

import enum
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from . import codec
from .april import (DEFAULT_JOIN_ORDER, Verdict, build_april,
                    intersect_filter, linestring_filter, mixed_order_filter, parse_join_order,
                    within_filter)
from .geom import (Linestring, Mbr, SimplePolygon, polygon_linestring_intersect, polygon_within,
                   polygons_intersect, union_mbr)
from .grid import GridConfig, grid_for_extent
from .raster import Backend, rasterize_linestring
from .ri import Side, build_ri, ri_join, ri_within
from .store import ApproxStore, TileStore


class JoinPredicate(enum.Enum):
    INTERSECTS = "intersects"
    WITHIN = "within"
    POLYLINE = "polyline"


class Filter(enum.Enum):
    NONE = "none"
    RI = "ri"
    APRIL = "april"


class ConfigError(ValueError):
    pass


class Dataset:
    """A collection of (id, geometry) with unique ids."""

    def __init__(self, objects: Iterable[tuple[int, SimplePolygon | Linestring]]):
        self.objects = list(objects)
        self._by_id = {}
        for oid, geom in self.objects:
            if oid in self._by_id:
                raise ValueError(f"duplicate object id {oid}")
            self._by_id[oid] = geom
        self.mbr = union_mbr(g.mbr for _, g in self.objects) if self.objects else None

    @classmethod
    def from_geometries(cls, geoms: Iterable) -> "Dataset":
        return cls(enumerate(geoms))

    def __getitem__(self, oid: int):
        return self._by_id[oid]

    def __iter__(self) -> Iterator[tuple[int, SimplePolygon | Linestring]]:
        return iter(self.objects)

    def __len__(self) -> int:
        return len(self.objects)

    def has_linestrings(self) -> bool:
        return any(isinstance(g, Linestring) for _, g in self.objects)


@dataclass(frozen=True)
class JoinConfig:
    order: int = 16
    backend: Backend = Backend.ONESTEP
    filter: Filter = Filter.APRIL
    compressed: bool = False
    partitions: int = 1
    join_order: tuple[str, ...] = DEFAULT_JOIN_ORDER
    # order of the right input's APRIL approximations; None means same as ``order``
    right_order: int | None = None
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))
        object.__setattr__(self, "filter", Filter(self.filter))
        object.__setattr__(self, "join_order", parse_join_order(self.join_order))
        if self.partitions < 1:
            raise ConfigError("partitions must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.right_order is not None and self.right_order != self.order and self.filter is not Filter.APRIL:
            raise ConfigError("mixed orders require the APRIL filter")

    @property
    def s_order(self) -> int:
        return self.order if self.right_order is None else self.right_order


PHASES = ("mbr_join", "build", "intermediate", "refinement")


@dataclass
class JoinStats:
    candidates: int = 0
    true_hits: int = 0
    true_negatives: int = 0
    indecisive: int = 0
    refined_accepted: int = 0
    seconds: dict[str, float] = field(default_factory=lambda: dict.fromkeys(PHASES, 0.0))

    @property
    def results(self) -> int:
        return self.true_hits + self.refined_accepted

    def count(self, v: Verdict) -> None:
        self.candidates += 1
        if v is Verdict.TRUE_HIT:
            self.true_hits += 1
        elif v is Verdict.TRUE_NEGATIVE:
            self.true_negatives += 1
        else:
            self.indecisive += 1

    def merge(self, other: "JoinStats") -> "JoinStats":
        self.candidates += other.candidates
        self.true_hits += other.true_hits
        self.true_negatives += other.true_negatives
        self.indecisive += other.indecisive
        self.refined_accepted += other.refined_accepted
        for k, v in other.seconds.items():
            self.seconds[k] = self.seconds.get(k, 0.0) + v
        return self

    def pct(self, n: int) -> float:
        return 100.0 * n / self.candidates if self.candidates else 0.0

    def to_dict(self) -> dict:
        secs = dict(self.seconds)
        secs["total"] = sum(self.seconds.values())
        return {
            "candidates": self.candidates,
            "true_hits": self.true_hits,
            "true_negatives": self.true_negatives,
            "indecisive": self.indecisive,
            "true_hits_pct": round(self.pct(self.true_hits), 4),
            "true_negatives_pct": round(self.pct(self.true_negatives), 4),
            "indecisive_pct": round(self.pct(self.indecisive), 4),
            "refined_accepted": self.refined_accepted,
            "results": self.results,
            "seconds": secs,
        }


# ---------------------------------------------------------------- MBR join

def _mbrs(objs) -> list[tuple[int, Mbr]]:
    return [(oid, g.mbr if hasattr(g, "mbr") else g) for oid, g in objs]


def mbr_join(R, S, predicate: JoinPredicate | str = JoinPredicate.INTERSECTS) -> Iterator[tuple[int, int]]:
    """Candidate pairs by plane sweep on x with a y-overlap check.

    R and S are iterables of (id, geometry-or-Mbr). For within joins only
    pairs whose r-MBR lies inside the s-MBR are kept. Boundaries are closed.
    """
    within = JoinPredicate(predicate) is JoinPredicate.WITHIN
    rs = sorted(_mbrs(R), key=lambda t: t[1].xmin)
    ss = sorted(_mbrs(S), key=lambda t: t[1].xmin)
    i = j = 0
    while i < len(rs) and j < len(ss):
        if rs[i][1].xmin <= ss[j][1].xmin:
            rid, a = rs[i]
            k = j
            while k < len(ss) and ss[k][1].xmin <= a.xmax:
                sid, b = ss[k]
                if a.ymin <= b.ymax and b.ymin <= a.ymax and (not within or a.within(b)):
                    yield rid, sid
                k += 1
            i += 1
        else:
            sid, b = ss[j]
            k = i
            while k < len(rs) and rs[k][1].xmin <= b.xmax:
                rid, a = rs[k]
                if a.ymin <= b.ymax and b.ymin <= a.ymax and (not within or a.within(b)):
                    yield rid, sid
                k += 1
            j += 1


# ---------------------------------------------------------------- partitioning

@dataclass
class Tile:
    index: int
    bounds: Mbr
    r_ids: list[int] = field(default_factory=list)
    s_ids: list[int] = field(default_factory=list)
    extent: Mbr | None = None


@dataclass
class PartitionScheme:
    p: int
    map_mbr: Mbr
    tiles: list[Tile]

    def _step(self) -> tuple[float, float]:
        m = self.map_mbr
        return (m.width / self.p or 1.0), (m.height / self.p or 1.0)

    def col_of(self, x: float) -> int:
        w, _ = self._step()
        return min(max(int((x - self.map_mbr.xmin) / w), 0), self.p - 1)

    def row_of(self, y: float) -> int:
        _, h = self._step()
        return min(max(int((y - self.map_mbr.ymin) / h), 0), self.p - 1)

    def owner(self, x: float, y: float) -> int:
        """Tile owning a point: closed on the left/bottom edge, open on the
        right/top edge, except for the last column and row."""
        return self.row_of(y) * self.p + self.col_of(x)

    def tiles_of(self, m: Mbr) -> Iterator[int]:
        for row in range(self.row_of(m.ymin), self.row_of(m.ymax) + 1):
            for col in range(self.col_of(m.xmin), self.col_of(m.xmax) + 1):
                yield row * self.p + col


def _pad(m: Mbr) -> Mbr:
    # grids need a positive extent in both directions; a lone horizontal or
    # vertical linestring would not give one
    size = max(m.width, m.height)
    if size == 0.0:
        size = max(abs(m.xmin), abs(m.ymin), 1.0)
    dx = size / 2 if m.width == 0.0 else 0.0
    dy = size / 2 if m.height == 0.0 else 0.0
    return Mbr(m.xmin - dx, m.ymin - dy, m.xmax + dx, m.ymax + dy)


def partition(R: Dataset, S: Dataset, p: int, map_mbr: Mbr | None = None) -> PartitionScheme:
    if p < 1:
        raise ConfigError("p must be >= 1")
    if map_mbr is None:
        parts = [d.mbr for d in (R, S) if d.mbr is not None]
        if not parts:
            raise ConfigError("both datasets are empty")
        map_mbr = union_mbr(parts)
    m = map_mbr
    w, h = m.width / p, m.height / p
    tiles = []
    for row in range(p):
        for col in range(p):
            x1 = m.xmax if col == p - 1 else m.xmin + (col + 1) * w
            y1 = m.ymax if row == p - 1 else m.ymin + (row + 1) * h
            tiles.append(Tile(row * p + col, Mbr(m.xmin + col * w, m.ymin + row * h, x1, y1)))
    scheme = PartitionScheme(p, map_mbr, tiles)
    members: dict[int, list[Mbr]] = {}
    for ds, attr in ((R, "r_ids"), (S, "s_ids")):
        for oid, g in ds:
            for t in scheme.tiles_of(g.mbr):
                getattr(tiles[t], attr).append(oid)
                members.setdefault(t, []).append(g.mbr)
    for t, mbrs in members.items():
        tiles[t].extent = _pad(union_mbr(mbrs))
    return scheme


# ---------------------------------------------------------------- approximations

def _approx_kind(cfg: JoinConfig, geom_is_line: bool) -> str | None:
    if cfg.filter is Filter.NONE:
        return None
    if geom_is_line:
        return "cells"
    return "ri" if cfg.filter is Filter.RI else "april"


def build_approx(geom, g: GridConfig, kind: str, backend: Backend, compressed: bool,
                 side: Side = Side.R):
    if kind == "cells":
        if not isinstance(geom, Linestring):
            raise ConfigError("cell lists are built for linestrings only")
        cells = rasterize_linestring(geom, g)
        return codec.encode_values(cells) if compressed else cells
    if not isinstance(geom, SimplePolygon):
        raise ConfigError(f"{kind} approximations need polygons")
    if kind == "ri":
        return build_ri(geom, g, side, backend)
    a = build_april(geom, g, backend)
    return a.compress() if compressed else a


class _TileApprox:
    """Lazily built approximations of one tile, one dataset side."""

    def __init__(self, ds: Dataset, g: GridConfig | None, kind: str | None, cfg: JoinConfig,
                 side: Side, store: ApproxStore | None, tile: int):
        self.ds, self.g, self.kind, self.cfg, self.side = ds, g, kind, cfg, side
        self.records = store.tiles[tile].records if store is not None else {}
        self.built = 0.0

    def get(self, oid: int):
        rec = self.records.get(oid)
        if rec is None:
            t0 = time.perf_counter()
            rec = build_approx(self.ds[oid], self.g, self.kind, self.cfg.backend,
                               self.cfg.compressed, self.side)
            self.records[oid] = rec
            self.built += time.perf_counter() - t0
        return rec


def build_store(ds: Dataset, scheme: PartitionScheme, cfg: JoinConfig, side: Side = Side.R) -> ApproxStore:
    """Approximations of every member of every tile, for persisting."""
    lines = ds.has_linestrings()
    if lines and any(isinstance(g, SimplePolygon) for _, g in ds):
        raise ConfigError("a dataset must hold only polygons or only linestrings")
    kind = _approx_kind(cfg, lines)
    if kind is None:
        raise ConfigError("nothing to build with filter none")
    order = cfg.order if side is Side.R else cfg.s_order
    store = ApproxStore(kind, order, cfg.compressed, scheme.p, scheme.map_mbr, side)
    for tile in scheme.tiles:
        ids = tile.r_ids if side is Side.R else tile.s_ids
        if not ids:
            continue
        g = GridConfig(order, tile.extent)
        ts = TileStore(tile.extent)
        for oid in sorted(ids):
            ts.records[oid] = build_approx(ds[oid], g, kind, cfg.backend, cfg.compressed, side)
        store.tiles[tile.index] = ts
    return store


def _check_store(store: ApproxStore, scheme: PartitionScheme, kind: str, order: int,
                 side: Side, ids_attr: str, label: str) -> None:
    def bad(msg):
        raise ConfigError(f"{label} approximations incompatible: {msg}")
    if store.kind != kind:
        bad(f"file holds {store.kind} records, {kind} needed")
    if store.order != order:
        bad(f"file order {store.order}, expected {order}")
    if kind == "ri" and store.side is not side:
        bad(f"RI codes encoded for side {store.side.value}, expected {side.value} (build with --side {side.value})")
    if store.p != scheme.p or tuple(store.map_mbr) != tuple(scheme.map_mbr):
        bad("partitioning (p or map extent) differs; build with the same --partitions and --context")
    for tile in scheme.tiles:
        ids = getattr(tile, ids_attr)
        if not ids:
            continue
        ts = store.tiles.get(tile.index)
        if ts is None or tuple(ts.extent) != tuple(tile.extent):
            bad(f"raster extent of tile {tile.index} differs")
        missing = set(ids) - ts.records.keys()
        if missing:
            bad(f"tile {tile.index} lacks {len(missing)} object(s), e.g. id {min(missing)}")


# ---------------------------------------------------------------- filter and refinement

def filter_pair(pred: JoinPredicate, cfg: JoinConfig, ar, as_) -> Verdict:
    if cfg.filter is Filter.NONE:
        return Verdict.INDECISIVE
    if pred is JoinPredicate.POLYLINE:
        return linestring_filter(ar, as_)
    if cfg.filter is Filter.RI:
        return ri_join(ar, as_) if pred is JoinPredicate.INTERSECTS else ri_within(ar, as_)
    if ar.order != as_.order:
        return mixed_order_filter(ar, as_)
    if pred is JoinPredicate.WITHIN:
        return within_filter(ar, as_)
    return intersect_filter(ar, as_, cfg.join_order)


_REFINE = {
    JoinPredicate.INTERSECTS: polygons_intersect,
    JoinPredicate.WITHIN: polygon_within,
    JoinPredicate.POLYLINE: polygon_linestring_intersect,
}


def _validate(R: Dataset, S: Dataset, pred: JoinPredicate, cfg: JoinConfig) -> None:
    if any(not isinstance(g, SimplePolygon) for _, g in R):
        raise ConfigError("the left input must contain polygons")
    want = Linestring if pred is JoinPredicate.POLYLINE else SimplePolygon
    if any(not isinstance(g, want) for _, g in S):
        raise ConfigError(f"the right input must contain {want.__name__} objects for {pred.value}")
    if cfg.s_order != cfg.order and pred is JoinPredicate.WITHIN:
        raise ConfigError("mixed-order filtering supports intersects only")
    if pred is JoinPredicate.POLYLINE:
        if cfg.filter is Filter.RI:
            raise ConfigError("the RI filter does not support polygon-linestring joins")
        if cfg.s_order != cfg.order:
            raise ConfigError("polygon-linestring joins need a single order")


def _join_tile(tile: Tile, scheme: PartitionScheme, R: Dataset, S: Dataset, pred: JoinPredicate,
               cfg: JoinConfig, lstore, rstore) -> tuple[set, JoinStats]:
    st = JoinStats()
    out: set[tuple[int, int]] = set()
    if not tile.r_ids or not tile.s_ids:
        return out, st
    t0 = time.perf_counter()
    cands = []
    for rid, sid in mbr_join(((i, R[i]) for i in tile.r_ids), ((i, S[i]) for i in tile.s_ids), pred):
        a, b = R[rid].mbr, S[sid].mbr
        if scheme.owner(max(a.xmin, b.xmin), max(a.ymin, b.ymin)) == tile.index:
            cands.append((rid, sid))
    st.seconds["mbr_join"] += time.perf_counter() - t0

    left = right = None
    if cfg.filter is not Filter.NONE:
        lg = GridConfig(cfg.order, tile.extent)
        rg = GridConfig(cfg.s_order, tile.extent)
        left = _TileApprox(R, lg, _approx_kind(cfg, False), cfg, Side.R, lstore, tile.index)
        right = _TileApprox(S, rg, _approx_kind(cfg, pred is JoinPredicate.POLYLINE), cfg,
                            Side.S, rstore, tile.index)

    refine = []
    t0 = time.perf_counter()
    for rid, sid in cands:
        v = Verdict.INDECISIVE if left is None else filter_pair(pred, cfg, left.get(rid), right.get(sid))
        st.count(v)
        if v is Verdict.TRUE_HIT:
            out.add((rid, sid))
        elif v is Verdict.INDECISIVE:
            refine.append((rid, sid))
    elapsed = time.perf_counter() - t0
    built = (left.built + right.built) if left is not None else 0.0
    st.seconds["build"] += built
    st.seconds["intermediate"] += elapsed - built

    t0 = time.perf_counter()
    exact = _REFINE[pred]
    for rid, sid in refine:
        if exact(R[rid], S[sid]):
            st.refined_accepted += 1
            out.add((rid, sid))
    st.seconds["refinement"] += time.perf_counter() - t0
    return out, st


def run_join(R: Dataset, S: Dataset, predicate: JoinPredicate | str = JoinPredicate.INTERSECTS,
             cfg: JoinConfig = JoinConfig(), left_store: ApproxStore | None = None,
             right_store: ApproxStore | None = None,
             scheme: PartitionScheme | None = None) -> tuple[set[tuple[int, int]], JoinStats]:
    """Exact join of R and S; returns the result pairs and filter statistics."""
    pred = JoinPredicate(predicate)
    _validate(R, S, pred, cfg)
    stats = JoinStats()
    if not len(R) or not len(S):
        return set(), stats
    t0 = time.perf_counter()
    if scheme is None:
        scheme = partition(R, S, cfg.partitions)
    elif scheme.p != cfg.partitions:
        raise ConfigError("scheme and config disagree on the number of partitions")
    stats.seconds["mbr_join"] += time.perf_counter() - t0
    if cfg.filter is not Filter.NONE:
        if left_store is not None:
            _check_store(left_store, scheme, _approx_kind(cfg, False), cfg.order, Side.R, "r_ids", "left")
        if right_store is not None:
            _check_store(right_store, scheme, _approx_kind(cfg, pred is JoinPredicate.POLYLINE),
                         cfg.s_order, Side.S, "s_ids", "right")

    def work(tile):
        return _join_tile(tile, scheme, R, S, pred, cfg, left_store, right_store)

    if cfg.threads > 1 and len(scheme.tiles) > 1:
        with ThreadPoolExecutor(cfg.threads) as ex:
            parts = list(ex.map(work, scheme.tiles))
    else:
        parts = [work(t) for t in scheme.tiles]
    out: set[tuple[int, int]] = set()
    for res, st in parts:
        out |= res
        stats.merge(st)
    return out, stats


def run_selection(query: SimplePolygon, D: Dataset, cfg: JoinConfig = JoinConfig(),
                  grid: GridConfig | None = None,
                  store: ApproxStore | None = None) -> tuple[set[int], JoinStats]:
    """Ids of dataset polygons intersecting ``query``.

    The query is approximated on the dataset's grid (``grid``, the grid of a
    single-tile ``store``, or one fitted to the dataset MBR). A query that
    misses the dataset MBR yields nothing; one that reaches outside the grid
    extent is rejected.
    """
    stats = JoinStats()
    if not len(D):
        return set(), stats
    if store is not None:
        if store.p != 1 or len(store.tiles) != 1:
            raise ConfigError("selection needs a single-tile approximation file")
        grid = store.grid(next(iter(store.tiles)))
        kind = _approx_kind(cfg, False)
        if cfg.filter is not Filter.NONE and (store.kind != kind or store.order != cfg.order):
            raise ConfigError(f"approximation file holds {store.kind} at order {store.order}, "
                              f"{kind} at order {cfg.order} needed")
    if grid is None:
        grid = grid_for_extent(D.mbr, cfg.order)
    t0 = time.perf_counter()
    if not query.mbr.intersects(D.mbr):
        return set(), stats
    if not query.mbr.within(grid.extent):
        raise ConfigError("query polygon extends outside the dataset grid extent")
    cands = [oid for oid, g in D if g.mbr.intersects(query.mbr)]
    stats.seconds["mbr_join"] += time.perf_counter() - t0

    out: set[int] = set()
    refine = []
    t0 = time.perf_counter()
    built = 0.0
    q = None
    records = dict(store.tiles[next(iter(store.tiles))].records) if store is not None else {}
    if cfg.filter is not Filter.NONE and cands:
        kind = _approx_kind(cfg, False)
        tb = time.perf_counter()
        q = build_approx(query, grid, kind, cfg.backend, cfg.compressed, Side.S)
        built += time.perf_counter() - tb
    for oid in cands:
        if q is None:
            v = Verdict.INDECISIVE
        else:
            rec = records.get(oid)
            if rec is None:
                tb = time.perf_counter()
                rec = records[oid] = build_approx(D[oid], grid, kind, cfg.backend, cfg.compressed, Side.R)
                built += time.perf_counter() - tb
            v = filter_pair(JoinPredicate.INTERSECTS, cfg, rec, q)
        stats.count(v)
        if v is Verdict.TRUE_HIT:
            out.add(oid)
        elif v is Verdict.INDECISIVE:
            refine.append(oid)
    stats.seconds["build"] += built
    stats.seconds["intermediate"] += time.perf_counter() - t0 - built

    t0 = time.perf_counter()
    for oid in refine:
        if polygons_intersect(D[oid], query):
            stats.refined_accepted += 1
            out.add(oid)
    stats.seconds["refinement"] += time.perf_counter() - t0
    return out, stats

