"""``rasterjoin`` command line: build, join, select and synth."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

from .april import FilterError, parse_join_order
from .geom import GeometryError, SimplePolygon
from .grid import MAX_ORDER, GridError
from .pipeline import (ConfigError, Dataset, Filter, JoinConfig, JoinPredicate, build_store,
                       partition, run_join, run_selection)
from .raster import Backend
from .ri import Side
from .store import FormatError, read, write
from .wkt import WktError, load_file, parse_geometry, to_wkt

REPORT_KEYS = ("candidates", "true_hits", "true_negatives", "indecisive", "true_hits_pct",
               "true_negatives_pct", "indecisive_pct", "refined_accepted", "results")


class CliError(Exception):
    pass


def _order(text: str) -> int:
    n = int(text)
    if not 1 <= n <= MAX_ORDER:
        raise argparse.ArgumentTypeError(f"order must be in 1..{MAX_ORDER}")
    return n


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _load(path: str, label: str) -> Dataset:
    res = load_file(path)
    if res.num_skipped:
        detail = ", ".join(f"{k}: {v}" for k, v in sorted(res.skipped.items()))
        print(f"warning: {label} {path}: skipped {res.num_skipped} geometries ({detail})", file=sys.stderr)
    return Dataset(res.objects)


def _context(paths) -> Dataset:
    objs = []
    for path in paths or ():
        objs.extend(g for _, g in load_file(path).objects)
    return Dataset.from_geometries(objs)


def _add_build_flags(p: argparse.ArgumentParser, order_default: int | None = 16) -> None:
    p.add_argument("--order", type=_order, default=order_default, help="Hilbert order N (default 16)")
    p.add_argument("--backend", choices=[b.value for b in Backend], default=Backend.ONESTEP.value)
    p.add_argument("--compress", action="store_true", help="VByte-compress interval lists")
    p.add_argument("--partitions", type=_positive, default=None, help="partitions per dimension (default 1)")


def cmd_build(args) -> int:
    ds = _load(args.input, "input")
    if not len(ds):
        raise CliError("input holds no usable geometry")
    other = _context(args.context)
    p = args.partitions or 1
    cfg = JoinConfig(order=args.order, backend=args.backend, filter=args.approx, compressed=args.compress,
                     partitions=p)
    side = Side(args.side)
    t0 = time.perf_counter()
    # the tiling is symmetric in its two inputs; only the id lists differ
    scheme = partition(ds, other, p) if side is Side.R else partition(other, ds, p)
    store = build_store(ds, scheme, cfg, side)
    write(store, args.out)
    elapsed = time.perf_counter() - t0
    report = {"objects": len(ds), "kind": store.kind, "order": store.order, "partitions": p,
              "tiles": len(store.tiles), **store.stats(), "file_bytes": os.path.getsize(args.out),
              "seconds": round(elapsed, 6)}
    print(json.dumps(report))
    return 0


def _emit_report(stats: dict, fmt: str, extra: dict) -> None:
    if fmt == "json":
        print(json.dumps({**stats, **extra}, indent=2))
        return
    row = {k: stats[k] for k in REPORT_KEYS}
    for k, v in stats["seconds"].items():
        row[f"seconds_{k}"] = round(v, 6)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
    w.writeheader()
    w.writerow(row)
    sys.stdout.write(buf.getvalue())


def _write_pairs(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in sorted(rows):
            f.write(",".join(map(str, row if isinstance(row, tuple) else (row,))) + "\n")


def cmd_join(args) -> int:
    R = _load(args.left, "left")
    S = _load(args.right, "right")
    lstore = read(args.left_approx) if args.left_approx else None
    rstore = read(args.right_approx) if args.right_approx else None
    ref = lstore or rstore
    order = args.order or (lstore.order if lstore else ref.order if ref else 16)
    right_order = args.right_order or (rstore.order if rstore else None)
    p = args.partitions or (ref.p if ref else 1)
    filt = args.filter
    if filt is None:
        filt = "ri" if ref is not None and ref.kind == "ri" else "april"
    cfg = JoinConfig(order=order, backend=args.backend, filter=filt, compressed=args.compress,
                     partitions=p, join_order=parse_join_order(args.join_order), right_order=right_order,
                     threads=args.threads)
    pairs, stats = run_join(R, S, args.predicate, cfg, lstore, rstore)
    if args.out:
        _write_pairs(args.out, pairs)
    _emit_report(stats.to_dict(), args.report,
                 {"predicate": args.predicate, "filter": cfg.filter.value, "order": cfg.order,
                  "right_order": cfg.s_order, "partitions": cfg.partitions})
    return 0


def cmd_select(args) -> int:
    if (args.query is None) == (args.query_file is None):
        raise CliError("give exactly one of --query and --query-file")
    text = args.query
    if args.query_file:
        with open(args.query_file, encoding="utf-8") as f:
            text = f.read().strip()
    query = parse_geometry(text.partition(";")[2] if ";" in text else text)
    if not isinstance(query, SimplePolygon):
        raise CliError("the query must be a POLYGON")
    D = _load(args.data, "data")
    store = read(args.data_approx) if args.data_approx else None
    order = args.order or (store.order if store else 16)
    filt = args.filter or ("ri" if store is not None and store.kind == "ri" else "april")
    cfg = JoinConfig(order=order, backend=args.backend, filter=filt, compressed=args.compress)
    ids, stats = run_selection(query, D, cfg, store=store)
    if args.out:
        _write_pairs(args.out, ids)
    _emit_report(stats.to_dict(), args.report, {"filter": cfg.filter.value, "order": cfg.order})
    return 0


def cmd_synth(args) -> int:
    from . import synth
    from .geom import Mbr
    extent = Mbr(*args.extent)
    if args.kind == "polygons":
        objs = synth.random_polygons(args.n, extent, args.min_radius, args.max_radius, seed=args.seed)
    else:
        objs = synth.random_linestrings(args.n, extent, step=args.max_radius, seed=args.seed)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for oid, g in objs:
            out.write(f"{oid};{to_wkt(g)}\n")
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rasterjoin", description="Raster-interval spatial joins.")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build and persist approximations of a WKT file")
    b.add_argument("input")
    b.add_argument("--out", required=True)
    b.add_argument("--approx", choices=["april", "ri"], default="april")
    b.add_argument("--side", choices=["R", "S"], default="R",
                   help="join input the file is meant for (sets the RI code encoding)")
    b.add_argument("--context", nargs="*", default=[],
                   help="WKT file(s) of the other join input, so tile extents match at join time")
    _add_build_flags(b)
    b.set_defaults(func=cmd_build)

    j = sub.add_parser("join", help="join two WKT files")
    j.add_argument("--left", required=True)
    j.add_argument("--right", required=True)
    j.add_argument("--left-approx")
    j.add_argument("--right-approx")
    j.add_argument("--predicate", choices=[p.value for p in JoinPredicate], default="intersects")
    j.add_argument("--filter", choices=[f.value for f in Filter], default=None)
    j.add_argument("--right-order", type=_order, default=None,
                   help="APRIL order of the right input (mixed-order joins)")
    j.add_argument("--join-order", default="AA,AF,FA")
    j.add_argument("--threads", type=_positive, default=1)
    j.add_argument("--report", choices=["json", "csv"], default="json")
    j.add_argument("--out", help="write result pairs as 'rid,sid' lines")
    _add_build_flags(j, order_default=None)
    j.set_defaults(func=cmd_join)

    s = sub.add_parser("select", help="polygons of a WKT file intersecting a query polygon")
    s.add_argument("--query", help="query polygon as WKT")
    s.add_argument("--query-file")
    s.add_argument("--data", required=True)
    s.add_argument("--data-approx")
    s.add_argument("--filter", choices=[f.value for f in Filter], default=None)
    s.add_argument("--report", choices=["json", "csv"], default="json")
    s.add_argument("--out", help="write matching ids, one per line")
    _add_build_flags(s, order_default=None)
    s.set_defaults(func=cmd_select)

    y = sub.add_parser("synth", help="write random polygons or linestrings as WKT")
    y.add_argument("kind", choices=["polygons", "linestrings"])
    y.add_argument("-n", type=_positive, default=100)
    y.add_argument("--seed", type=int, default=0)
    y.add_argument("--extent", type=float, nargs=4, default=[0.0, 0.0, 1.0, 1.0],
                   metavar=("XMIN", "YMIN", "XMAX", "YMAX"))
    y.add_argument("--min-radius", type=float, default=0.005)
    y.add_argument("--max-radius", type=float, default=0.05)
    y.add_argument("--out")
    y.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, FilterError, FormatError, GeometryError, GridError, WktError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
