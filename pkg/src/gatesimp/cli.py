"""Command line entry point: generate / discover / gategraph / query / verify / bench."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import GateSimpError, ResourceGuardError
from .gategraph import GateQueryIndex, build_local_gate_graph, load_weighted, query_distance, sparsify
from .gates import GateVertexSet, Method, SelfCheckError, discover, load_gate_set
from .graph import (APSP_MAX_N, Graph, generate, graph_stats, load_edge_list, write_edge_list,
                    write_label_table)
from .setcover import Mode, build_instance_bfs, build_instance_oracle
from .verify import size_bound_hint, verify_all

log = logging.getLogger("gatesimp")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_RESOURCE = 0, 2, 3, 4
CSV_HEADER = ["dataset", "n", "m", "diameter", "avg_dist", "epsilon", "method", "gates",
              "edges_stage1", "edges_sparsified", "build_ms", "verified"]
EXACT_STATS_MAX_N = 5000


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _load_graph(args) -> tuple[Graph, str]:
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            g, counts = load_edge_list(fh)
        log.info("loaded %s: %d lines, %d edges, %d self-loops dropped",
                 args.input, counts.raw_lines, counts.dedup_edges, counts.dropped_self_loops)
        return g, Path(args.input).stem
    if not args.family:
        raise ValueError("give --input FILE or --family NAME")
    if args.n is None:
        raise ValueError("--family needs --n")
    g = generate(args.family, args.n, args.density, args.seed)
    label = args.family if args.family not in ("er", "sf") else f"{args.family}_n{args.n}_d{args.density:g}_s{args.seed}"
    return g, label


def _param(args) -> tuple[Mode, int]:
    mode = Mode(args.mode)
    param = args.k if mode is Mode.KSKIP else args.epsilon
    if param is None:
        raise ValueError("--k is required for kskip mode" if mode is Mode.KSKIP else "--epsilon is required")
    return mode, param


def _out_dir(args) -> Path | None:
    if not args.out:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _gates(args, g: Graph) -> GateVertexSet:
    if getattr(args, "gates", None):
        with open(args.gates, encoding="utf-8") as fh:
            return load_gate_set(fh, g)
    mode, param = _param(args)
    return discover(g, param, args.method, mode, self_check=not args.no_self_check)


def _gate_epsilon(gs: GateVertexSet, args) -> int:
    # a k-skip cover is a gate set at k + 1
    eps = args.epsilon if args.epsilon is not None else (gs.param if gs.mode is Mode.GATE else gs.param + 1)
    return eps


def _as_gate_graph_input(gs: GateVertexSet, eps: int):
    return gs if gs.mode is Mode.GATE and gs.param == eps else gs.vertices


# -- subcommands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    g, label = _load_graph(args)
    out = _out_dir(args)
    if out:
        with open(out / "graph.txt", "w", encoding="utf-8") as fh:
            write_edge_list(g, fh)
        with open(out / "labels.tsv", "w", encoding="utf-8") as fh:
            write_label_table(g, fh)
    exact = g.n <= EXACT_STATS_MAX_N
    stats = graph_stats(g, exact=exact, samples=args.sample or 64, seed=args.seed or 0)
    _emit({"dataset": label, **stats.as_dict(doubled_edges=args.doubled_edges)})
    return EXIT_OK


def cmd_discover(args) -> int:
    g, label = _load_graph(args)
    mode, param = _param(args)
    out = _out_dir(args)
    if args.dump_instance:
        inst = build_instance_bfs(g, param) if mode is Mode.GATE else build_instance_oracle(g, param, mode)
        with open(args.dump_instance, "w", encoding="utf-8") as fh:
            inst.dump(fh, g.labels)
    gs = discover(g, param, args.method, mode, self_check=not args.no_self_check)
    if out:
        with open(out / "gates.txt", "w", encoding="utf-8") as fh:
            gs.dump(fh, g.labels)
    summary = {
        "dataset": label,
        "mode": gs.mode.value,
        "param": gs.param,
        "method": gs.method.value,
        "size": gs.size,
        "gates": [g.labels[v] for v in gs.sorted()],
        "ground": gs.stats.get("ground"),
        "build_ms": round(gs.stats["build_ms"], 3) if not args.no_timing else 0,
        "self_checked": not args.no_self_check,
    }
    if gs.mode is Mode.GATE and gs.param >= 2:
        summary["size_bound_hint"] = round(size_bound_hint(g.n, gs.param), 3)
    _emit(summary)
    return EXIT_OK


def cmd_gategraph(args) -> int:
    g, _ = _load_graph(args)
    gs = _gates(args, g)
    eps = _gate_epsilon(gs, args)
    out = _out_dir(args)
    stage1 = build_local_gate_graph(g, _as_gate_graph_input(gs, eps), eps)
    summary = {"gates": gs.size, "epsilon": eps, "edges_stage1": stage1.n_edges}
    if out:
        with open(out / "gategraph_stage1.txt", "w", encoding="utf-8") as fh:
            stage1.dump(fh, g.labels)
    if args.no_sparsify:
        summary.update(edges_sparsified=None, removed=None, sparsify="skipped")
    else:
        sp = sparsify(stage1)
        summary.update(edges_sparsified=sp.n_edges, removed=stage1.n_edges - sp.n_edges)
        if out:
            with open(out / "gategraph_sparsified.txt", "w", encoding="utf-8") as fh:
                sp.dump(fh, g.labels)
    _emit(summary)
    return EXIT_OK


def cmd_query(args) -> int:
    g, _ = _load_graph(args)
    gs = _gates(args, g)
    eps = _gate_epsilon(gs, args)
    if args.gategraph:
        with open(args.gategraph, encoding="utf-8") as fh:
            wg = load_weighted(fh, g, gs.vertices)
    else:
        wg = build_local_gate_graph(g, _as_gate_graph_input(gs, eps), eps)
        if not args.no_sparsify:
            wg = sparsify(wg)
    u, v = g.vertex(args.u), g.vertex(args.v)
    if args.precompute_balls:
        res = GateQueryIndex(g, gs.vertices, wg, eps).query(u, v)
    else:
        res = query_distance(g, gs.vertices, wg, u, v, eps)
    _emit({"u": args.u, "v": args.v, **res.as_dict(g.labels)})
    return EXIT_OK


def cmd_verify(args) -> int:
    g, label = _load_graph(args)
    gs = _gates(args, g)
    eps = _gate_epsilon(gs, args)
    stage1 = build_local_gate_graph(g, _as_gate_graph_input(gs, eps), eps)
    sp = None if args.no_sparsify else sparsify(stage1)
    reports = verify_all(g, eps, gs, stage1, sp, sample=args.sample)
    ok = all(r.passed for r in reports)
    _emit({"dataset": label, "epsilon": eps, "gates": gs.size, "pass": ok,
           "authoritative": all(r.authoritative for r in reports),
           "reports": [r.as_dict(timing=not args.no_timing) for r in reports]})
    return EXIT_OK if ok else EXIT_VERIFY


# -- bench ------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchRecord:
    dataset: str
    n: int
    m: int
    diameter: int
    avg_dist: float
    epsilon: int
    method: str
    gates: int
    edges_stage1: int
    edges_sparsified: int
    build_ms: float
    verified: str

    def row(self) -> list:
        return [self.dataset, self.n, self.m, self.diameter, f"{self.avg_dist:.4f}", self.epsilon, self.method,
                self.gates, self.edges_stage1, self.edges_sparsified, f"{self.build_ms:.3f}", self.verified]


def parse_dataset(spec: str) -> tuple[str, Graph]:
    """``family:n[:density[:seed]]`` for generators, ``file:PATH`` for edge lists."""
    kind, _, rest = spec.partition(":")
    if kind == "file":
        with open(rest, encoding="utf-8") as fh:
            g, _ = load_edge_list(fh)
        return Path(rest).stem, g
    parts = rest.split(":") if rest else []
    if not parts:
        raise ValueError(f"dataset spec {spec!r} needs at least a vertex count")
    n = int(parts[0])
    density = float(parts[1]) if len(parts) > 1 else None
    seed = int(parts[2]) if len(parts) > 2 else 0
    g = generate(kind, n, density, seed)
    label = kind + f"_n{n}" + (f"_d{density:g}_s{seed}" if density is not None else "")
    return label, g


def _bench_dataset(label: str, g: Graph, epsilons, methods, do_verify: bool, timing: bool,
                   doubled: bool) -> list[BenchRecord]:
    stats = graph_stats(g, exact=g.n <= EXACT_STATS_MAX_N)
    rows = []
    for eps in epsilons:
        for method in methods:
            t0 = time.perf_counter()
            gs = discover(g, eps, method, Mode.GATE, self_check=False)
            ms = (time.perf_counter() - t0) * 1000
            stage1 = build_local_gate_graph(g, gs, eps)
            sp = sparsify(stage1)
            verified = ""
            if do_verify:
                if g.n > APSP_MAX_N:
                    verified = "skipped"
                else:
                    verified = str(all(r.passed for r in verify_all(g, eps, gs, stage1, sp))).lower()
            rows.append(BenchRecord(label, g.n, 2 * g.m if doubled else g.m, stats.diameter, stats.avg_dist,
                                    eps, Method(method).value, gs.size, stage1.n_edges, sp.n_edges,
                                    ms if timing else 0.0, verified))
    return rows


def _bench_cell(args_tuple):
    spec, epsilons, methods, do_verify, timing, doubled = args_tuple
    label, g = parse_dataset(spec)
    return _bench_dataset(label, g, epsilons, methods, do_verify, timing, doubled)


def run_bench(datasets, epsilons, methods, do_verify=False, timing=True, doubled=False,
              threads: int | None = None) -> list[BenchRecord]:
    threads = threads or int(os.environ.get("GATESIMP_THREADS", "1") or 1)
    jobs = [(d, list(epsilons), list(methods), do_verify, timing, doubled) for d in datasets]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_bench_cell, jobs))
    else:
        chunks = [_bench_cell(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.dataset, r.epsilon, r.method))
    return rows


def write_bench_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.row())


def cmd_bench(args) -> int:
    datasets = list(args.dataset or [])
    if args.input:
        datasets.append(f"file:{args.input}")
    if args.family:
        spec = f"{args.family}:{args.n}"
        if args.density is not None:
            spec += f":{args.density:g}:{args.seed or 0}"
        datasets.append(spec)
    if not datasets:
        raise ValueError("bench needs at least one --dataset (or --input / --family)")
    epsilons = [int(e) for e in args.epsilons.split(",")] if args.epsilons else [args.epsilon or 3]
    methods = [Method(m).value for m in args.methods.split(",")]
    rows = run_bench(datasets, epsilons, methods, args.verify, not args.no_timing, args.doubled_edges)
    if args.out:
        path = Path(args.out)
        if path.suffix != ".csv":
            path.mkdir(parents=True, exist_ok=True)
            path = path / "bench.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_bench_csv(rows, fh)
    else:
        write_bench_csv(rows, sys.stdout)
    if args.verify and any(r.verified == "false" for r in rows):
        return EXIT_VERIFY
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("input")
    src.add_argument("--input", help="edge-list file")
    src.add_argument("--family", choices=["er", "sf", "path", "cycle", "star", "complete"])
    src.add_argument("--n", type=int)
    src.add_argument("--density", type=float)
    src.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--method", choices=[m.value for m in Method], default="sc")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="gate")
    p.add_argument("--gates", help="gate-set file written by `discover`")
    p.add_argument("--no-sparsify", action="store_true")
    p.add_argument("--no-self-check", action="store_true")
    p.add_argument("--sample", type=int)
    p.add_argument("--out")
    p.add_argument("--no-timing", action="store_true", help="write 0 for timing fields (byte-stable output)")
    p.add_argument("--doubled-edges", action="store_true", help="report edge counts doubled (SNAP convention)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gatesimp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in [("generate", cmd_generate), ("discover", cmd_discover), ("gategraph", cmd_gategraph),
                     ("query", cmd_query), ("verify", cmd_verify), ("bench", cmd_bench)]:
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(func=fn)
        if name == "discover":
            p.add_argument("--dump-instance", metavar="FILE")
        elif name == "query":
            p.add_argument("--u", required=True)
            p.add_argument("--v", required=True)
            p.add_argument("--gategraph", help="weighted edge-list to query instead of rebuilding")
            p.add_argument("--precompute-balls", action="store_true",
                           help="materialise every vertex's gate ball before answering")
        elif name == "bench":
            p.add_argument("--dataset", action="append",
                           help="family:n[:density[:seed]] or file:PATH; repeatable")
            p.add_argument("--epsilons", help="comma-separated list, e.g. 3,4")
            p.add_argument("--methods", default="sc,fs")
            p.add_argument("--verify", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.input and args.family:
        print("gatesimp: give exactly one of --input and --family", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except SelfCheckError as exc:
        print(f"gatesimp: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ResourceGuardError as exc:
        print(f"gatesimp: resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (GateSimpError, ValueError, OSError) as exc:
        print(f"gatesimp: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
