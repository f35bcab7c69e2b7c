"""Command-line front end: decompose, barcode, generators, query, bench."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
import tracemalloc
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from .coeff import GF
from .complexes import (
    FilteredCliqueComplex,
    FilteredCubicalComplex,
    euclidean_metric,
    torus_metric,
)
from .datasets import build_dataset
from .decompose import (
    DecomposeOptions,
    decompose_compressed,
    decompose_full,
)
from .errors import UmatchError, UsageError
from .io import (
    bar_json,
    barcode_json,
    cell_id,
    dump_json,
    load_distance_csv,
    load_image_text,
    load_points_csv,
    load_triplet_file,
    write_triplet_text,
)
from .linalg import _dense_product, _invert_unitriangular
from .matrix import antitranspose_view, matvec, submatrix_view
from .persistence import Chain, NEVER, NEVER_BOUNDS, PersistenceEngine
from .retrieve import RetrievalTarget, retrieve
from .sparsify import column_validity_check, early_stop_solve


def _open_output(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _add_common_complex_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--field", type=int, default=2, help="prime field modulus (default 2)")
    sp.add_argument("--max-dim", type=int, default=2, help="top cell dimension")
    sp.add_argument("--threshold", type=float, default=None, help="maximum filtration value")
    sp.add_argument("--metric", choices=["euclidean", "torus"], default="euclidean")
    sp.add_argument("--keep-empty-bars", action="store_true")
    sp.add_argument("--no-clearing", action="store_true")
    sp.add_argument("--no-pareto", action="store_true")
    sp.add_argument("--generators-strategy", choices=["exact", "early-stop"], default="exact")
    sp.add_argument("--output", default=None, help="output path (default stdout)")
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--input-type", choices=["points", "distances", "image"], default=None)


def _load_complex(args) -> FilteredCliqueComplex | FilteredCubicalComplex:
    path = args.input
    kind = args.input_type
    if kind is None:
        kind = "image" if path.endswith(".img") or path.endswith(".txt") else "points"
    if kind == "image":
        pixels = load_image_text(path)
        return FilteredCubicalComplex(pixels)
    if kind == "distances":
        d = load_distance_csv(path)
    else:
        pts = load_points_csv(path)
        d = euclidean_metric(pts) if args.metric == "euclidean" else torus_metric(pts)
    threshold = args.threshold if args.threshold is not None else float(d.max())
    return FilteredCliqueComplex(d, max_dim=args.max_dim, threshold=threshold)


def _build_engine(cx, args) -> PersistenceEngine:
    return PersistenceEngine(
        cx,
        GF(args.field),
        max_dim=args.max_dim if cx.kind == "clique" else None,
        clearing=not args.no_clearing,
        pareto=not args.no_pareto,
        keep_empty_bars=args.keep_empty_bars,
    )


def cmd_decompose(args) -> int:
    d = load_triplet_file(args.input)
    opts = DecomposeOptions(clearing=not args.no_clearing, pareto=not args.no_pareto)
    u = decompose_compressed(d, opts)
    summary = {
        "rows": d.nrows,
        "cols": d.ncols,
        "field": d.field.p,
        "rank": u.rank,
        "nnz_d": d.nnz,
        "nnz_matching": u.rank,
        "nnz_rbar_offdiag": u.rbar.nnz_offdiag(),
    }
    if args.verify:
        full = decompose_full(d)
        r = _invert_unitriangular(full.rinv)
        c = _invert_unitriangular(full.cinv)
        rm = _dense_product(r, u.matching.to_oracle(d.field)).to_dense()
        dc = _dense_product(d, c).to_dense()
        summary["verified"] = rm == dc and full.matching == u.matching
        if not summary["verified"]:
            raise UmatchError("verification failed: defining identity violated")
    out, close = _open_output(args.output)
    try:
        if args.factors:
            write_triplet_text(out, u.matching.to_oracle(d.field))
            out.write("\n")
            write_triplet_text(out, u.rbar)
            out.write("\n")
        dump_json(summary, out)
    finally:
        if close:
            out.close()
    return 0


def cmd_barcode(args) -> int:
    cx = _load_complex(args)
    engine = _build_engine(cx, args)
    dims = list(range(engine.max_dim))
    if not dims:
        dims = [0]
    payload = barcode_json(engine, dims)
    if args.verify:
        payload["verified"] = _verify_barcode(engine, dims)
    out, close = _open_output(args.output)
    try:
        dump_json(payload, out)
    finally:
        if close:
            out.close()
    return 0


def _verify_barcode(engine, dims) -> bool:
    for n in dims:
        for bar in engine.bars(n):
            ch = engine.cycle_representative(bar)
            d = engine.boundary(n)
            if n >= 1 and d is not None and matvec(d, ch.vector):
                return False
    return True


def cmd_generators(args) -> int:
    cx = _load_complex(args)
    engine = _build_engine(cx, args)
    dims = [args.dim] if args.dim is not None else list(range(engine.max_dim))
    strategy = "early_stop" if args.generators_strategy == "early-stop" else "exact"
    bars = []
    for n in dims:
        for bar in engine.bars(n):
            chain = engine.cycle_representative(bar, strategy=strategy)
            if args.verify and strategy == "early_stop" and bar.finite:
                u = engine.umatch(n + 1)
                col = engine.matching(n + 1).col_of_row[bar.birth_pos]
                if not column_validity_check(u, col, early_stop_solve(u, col)):
                    raise UmatchError("early-stop column failed the validity check")
            bars.append(bar_json(engine, bar, chain))
    out, close = _open_output(args.output)
    try:
        dump_json({"field": engine.field.p, "bars": bars}, out)
    finally:
        if close:
            out.close()
    return 0


def _parse_chain(engine, text: str) -> Chain:
    spec = json.loads(text)
    dim = spec["dim"]
    order = engine.order(dim)
    f = engine.field
    pairs = []
    for cellref, coeff in spec["entries"]:
        if engine.complex.kind == "clique":
            key = tuple(cellref)
        else:
            key = (tuple(cellref["anchor"]), tuple(cellref["extent"]))
        if key not in order.pos:
            raise UsageError(f"cell {cellref} is not in the complex")
        pairs.append((order.pos[key], coeff))
    from .matrix import SparseVector

    return Chain(dim, SparseVector.from_pairs(f, pairs))


def cmd_query(args) -> int:
    cx = _load_complex(args)
    engine = _build_engine(cx, args)
    result: dict = {"query": args.subquery}
    if args.subquery == "bounding-chain":
        x = _parse_chain(engine, args.chain)
        res = engine.bounding_chain(x)
        if res is NEVER_BOUNDS:
            result["bounds"] = False
        else:
            result["bounds"] = True
            result["index"] = res.index
            result["value"] = res.value
            result["witness"] = [
                [cell_id(engine, res.witness.dim, pos), v]
                for pos, v in res.witness.vector.entries
            ]
    elif args.subquery == "time-of-homology":
        x = _parse_chain(engine, args.chain)
        g = _parse_chain(engine, args.chain2)
        t = engine.time_of_homology(x, g)
        result["homologous"] = t is not NEVER
        if t is not NEVER:
            result["value"] = t
    elif args.subquery == "lifespan":
        x = _parse_chain(engine, args.chain)
        lo, hi = engine.lifespan(x)
        result["birth"] = lo
        result["bounding"] = None if hi == float("inf") else hi
    elif args.subquery == "retrieve":
        n = args.dim if args.dim is not None else 1
        u = engine.umatch(n)
        if u is None:
            raise UsageError(f"no decomposition available in dimension {n}")
        vec = retrieve(u, RetrievalTarget(args.target, args.axis, args.index))
        result["entries"] = [[i, v] for i, v in vec.entries]
    else:
        raise UsageError(f"unknown subquery {args.subquery!r}")
    out, close = _open_output(args.output)
    try:
        dump_json(result, out)
    finally:
        if close:
            out.close()
    return 0


def _make_variant(name, d, matching):
    if name == "D":
        return d
    if name == "D_perp":
        return antitranspose_view(d)
    rho, kappa = matching.rho, matching.kappa
    if name == "D_rk":
        return submatrix_view(d, rho, kappa)
    return antitranspose_view(submatrix_view(d, rho, kappa))


BENCH_VARIANTS = ("D", "D_perp", "D_rk", "D_rk_perp")


def _bench_one_seed(args, field, seed: int, trace_memory: bool) -> list[dict]:
    cx = build_dataset(args.dataset, seed=seed, n=args.n, side=args.side,
                       dim=args.point_dim)
    bench_dim = min(2, cx.max_dim)
    engine = PersistenceEngine(cx, field, clearing=not args.no_clearing,
                               pareto=not args.no_pareto)
    d = engine.boundary(bench_dim)
    if d is None:
        return []
    # load time for the source matrix and the matching is charged to every
    # variant alike, so the submatrix variants carry no hidden discount
    full = decompose_full(d)
    nnz_rinv = full.rinv.nnz_offdiag()
    matching = full.matching
    lower_dim_bars = len(engine.bars(bench_dim - 1))
    rows = []
    for variant in BENCH_VARIANTS:
        if trace_memory:
            tracemalloc.start()
        # wrapper construction counts toward the timing, so every variant is
        # charged the same matrix-and-matching setup cost
        t0 = time.perf_counter()
        mat = _make_variant(variant, d, matching)
        opts = DecomposeOptions(clearing=not args.no_clearing,
                                pareto=not args.no_pareto, counters=True)
        u = decompose_compressed(mat, opts)
        elapsed = time.perf_counter() - t0
        if trace_memory:
            _, peak = tracemalloc.get_traced_memory()
            tracemalloc.stop()
            heap_source = "tracemalloc-peak"
        else:
            peak = ""
            heap_source = "untraced-parallel"
        rows.append({
            "dataset": f"{args.dataset}-{seed}",
            "variant": variant,
            "rows": mat.nrows,
            "cols": mat.ncols,
            "nnz_matching": u.rank,
            "nnz_rinv_offdiag": nnz_rinv,
            "nnz_rbar_offdiag": u.rbar.nnz_offdiag(),
            "lower_dim_bars": lower_dim_bars,
            "seconds": f"{elapsed:.6f}",
            "peak_heap_bytes": peak,
            "heap_source": heap_source,
            "eliminations": u.stats.eliminations,
            "heap_pops": u.stats.heap_pops,
            "pareto_hits": u.stats.pareto_hits,
            "rows_cleared": u.stats.rows_cleared,
        })
    return rows


def cmd_bench(args) -> int:
    field = GF(args.field)
    seeds = list(range(args.seed, args.seed + args.trials))
    if args.parallel and len(seeds) > 1:
        with ThreadPoolExecutor() as pool:
            chunks = list(pool.map(
                lambda s: _bench_one_seed(args, field, s, trace_memory=False), seeds
            ))
    else:
        chunks = [_bench_one_seed(args, field, s, trace_memory=True) for s in seeds]
    rows = [r for chunk in chunks for r in chunk]
    out, close = _open_output(args.output)
    try:
        if rows:
            writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    finally:
        if close:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="umatch",
        description="Sparse exact matrix factorization and persistent (co)homology",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("decompose", help="factor a triplet-format matrix")
    sp.add_argument("input")
    sp.add_argument("--factors", action="store_true", help="dump matching and pivot block")
    sp.add_argument("--no-clearing", action="store_true")
    sp.add_argument("--no-pareto", action="store_true")
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--output", default=None)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("barcode", help="barcode of a filtered complex")
    sp.add_argument("input")
    _add_common_complex_flags(sp)
    sp.set_defaults(func=cmd_barcode)

    sp = sub.add_parser("generators", help="barcode with cycle representatives")
    sp.add_argument("input")
    sp.add_argument("--dim", type=int, default=None)
    _add_common_complex_flags(sp)
    sp.set_defaults(func=cmd_generators)

    sp = sub.add_parser("query", help="inverse problems and factor retrieval")
    sp.add_argument("input")
    sp.add_argument("subquery", choices=["bounding-chain", "time-of-homology",
                                         "lifespan", "retrieve"])
    sp.add_argument("--chain", default=None, help="chain as JSON")
    sp.add_argument("--chain2", default=None, help="second chain as JSON")
    sp.add_argument("--dim", type=int, default=None)
    sp.add_argument("--target", choices=["R", "Rinv", "C", "Cinv"], default="C")
    sp.add_argument("--axis", choices=["row", "col"], default="col")
    sp.add_argument("--index", type=int, default=0)
    _add_common_complex_flags(sp)
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("bench", help="decomposition benchmarks on built-in datasets")
    sp.add_argument("dataset", choices=["er", "uniform", "torus", "grf2d", "grf3d", "circle"])
    sp.add_argument("--n", type=int, default=25)
    sp.add_argument("--side", type=int, default=8)
    sp.add_argument("--point-dim", type=int, default=3)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--field", type=int, default=2)
    sp.add_argument("--no-clearing", action="store_true")
    sp.add_argument("--no-pareto", action="store_true")
    sp.add_argument("--parallel", action="store_true",
                    help="run independent dataset trials concurrently")
    sp.add_argument("--output", default=None)
    sp.set_defaults(func=cmd_bench)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UmatchError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
