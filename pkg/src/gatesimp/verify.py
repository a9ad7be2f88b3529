"""Brute-force checks of cover validity, distance recovery, sparsification and the k-skip chain."""

from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import ResourceGuardError
from .gategraph import GateQueryIndex, WeightedGraph
from .graph import APSP_MAX_N, DistanceOracle, Graph, apsp_oracle
from .setcover import CoverInstance, Mode, build_instance_bfs, build_instance_oracle, exact_solve, greedy_solve

MAX_VIOLATIONS = 100


@dataclass
class VerificationReport:
    check: str
    pairs_checked: int = 0
    violations: list[dict] = field(default_factory=list)
    n_violations: int = 0
    elapsed_ms: float = 0.0
    authoritative: bool = True
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.n_violations == 0

    def add(self, u, v, expected, observed, **extra) -> None:
        self.n_violations += 1
        if len(self.violations) < MAX_VIOLATIONS:
            self.violations.append({"u": u, "v": v, "expected": expected, "observed": observed, **extra})

    def as_dict(self, timing: bool = True) -> dict:
        out = {
            "check": self.check,
            "pass": self.passed,
            "pairs_checked": self.pairs_checked,
            "violations": self.violations,
            "n_violations": self.n_violations,
            "elapsed_ms": round(self.elapsed_ms, 3) if timing else 0,
        }
        if not self.authoritative:
            out["authoritative"] = False
        if self.details:
            out["details"] = self.details
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.as_dict(**kw), sort_keys=False)


class _Timer:
    def __init__(self, report):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.elapsed_ms = (time.perf_counter() - self.t0) * 1000


def _oracle(g: Graph, oracle: DistanceOracle | None, max_n: int) -> np.ndarray:
    if oracle is None:
        oracle = apsp_oracle(g, max_n=max_n)
    return oracle.dist.astype(np.int32)


def _check_cover(name, g, target, vs, endpoints_ok, oracle, max_n) -> VerificationReport:
    rep = VerificationReport(name)
    with _Timer(rep):
        D = _oracle(g, oracle, max_n)
        S = np.array(sorted(set(vs)), dtype=np.int64)
        for u in range(g.n):
            vs_u = np.flatnonzero(D[u] == target)
            vs_u = vs_u[vs_u > u]
            if vs_u.size == 0:
                continue
            rep.pairs_checked += vs_u.size
            if S.size == 0:
                ok = np.zeros(vs_u.size, dtype=bool)
            else:
                du = D[u, S][:, None]
                dv = D[np.ix_(S, vs_u)]
                hit = (du >= 0) & (dv >= 0) & (du + dv == target)
                if not endpoints_ok:
                    hit &= (du > 0) & (dv > 0)
                ok = hit.any(axis=0)
            for v in vs_u[~ok]:
                rep.add(u, int(v), "covered", "uncovered")
    return rep


def check_gate_cover(g: Graph, epsilon: int, vs: Iterable[int], oracle: DistanceOracle | None = None,
                     max_n: int = APSP_MAX_N) -> VerificationReport:
    """Every pair at distance ``epsilon`` has a vertex of ``vs`` strictly inside one of its shortest paths."""
    return _check_cover("gate_cover", g, epsilon, vs, False, oracle, max_n)


def check_kskip_cover(g: Graph, k: int, vs: Iterable[int], oracle: DistanceOracle | None = None,
                      max_n: int = APSP_MAX_N) -> VerificationReport:
    """Every pair at distance ``k - 1`` has a vertex of ``vs`` (endpoints included) on a shortest path."""
    return _check_cover("kskip_cover", g, k - 1, vs, True, oracle, max_n)


def check_recovery(g: Graph, epsilon: int, gates: Iterable[int], wg: WeightedGraph,
                   oracle: DistanceOracle | None = None, sample: int | None = None, seed: int = 0,
                   max_n: int = APSP_MAX_N) -> VerificationReport:
    """Every connected pair at distance >= ``epsilon`` is recovered exactly through the gate graph.

    Also expands each answer into its chain ``u, x_1, ..., x_k, v`` and checks that every
    hop is local (< ``epsilon``), that gate edges carry their true distance and that the
    hops add up. ``sample`` restricts the sources and marks the report non-authoritative.
    """
    rep = VerificationReport("recovery")
    with _Timer(rep):
        D = _oracle(g, oracle, max_n)
        gates = sorted(set(gates))
        sources = range(g.n)
        if sample is not None and sample < g.n:
            rng = np.random.default_rng(seed)
            sources = sorted(rng.choice(g.n, size=sample, replace=False).tolist())
            rep.authoritative = False
        far = (D >= epsilon)
        if not far.any():
            return rep
        idx = GateQueryIndex(g, gates, wg, epsilon)
        chain_ok: dict[tuple[int, int], bool] = {}
        for u in sources:
            targets = np.flatnonzero(far[u])
            targets = targets[targets > u] if sample is None else targets
            if targets.size == 0:
                continue
            rep.pairs_checked += targets.size
            dist, xg, yi = idx.row(u)
            got = dist[targets]
            want = D[u, targets]
            for v in targets[got != want]:
                obs = dist[v]
                rep.add(u, int(v), int(D[u, v]), int(obs) if math.isfinite(obs) else "UNREACHABLE")
            for v in targets[got == want]:
                x, y = idx.gates[int(xg[v])], idx.gates[int(yi[v])]
                key = (x, y)
                ok = chain_ok.get(key)
                if ok is None:
                    ok = chain_ok[key] = _gate_chain_ok(idx, D, x, y, epsilon)
                if not ok or not (D[u, x] < epsilon and D[y, v] < epsilon):
                    rep.add(u, int(v), int(D[u, v]), "non-local chain", witness=[x, y])
        rep.details["gates"] = len(gates)
    return rep


def _gate_chain_ok(idx: GateQueryIndex, D, x, y, epsilon) -> bool:
    chain = idx.gate_chain(idx.pos[x], idx.pos[y])
    for a, b in zip(chain, chain[1:]):
        w = idx.wg.weight(a, b)
        if w is None or w >= epsilon or D[a, b] != w:
            return False
    return True


def recovery_chain(idx: GateQueryIndex, u: int, v: int) -> list[int]:
    """The vertex sequence ``u, gates..., v`` realising the recovered distance (duplicates merged)."""
    dist, xg, yi = idx.row(u)
    if not math.isfinite(dist[v]):
        return []
    chain = [u] + idx.gate_chain(int(xg[v]), int(yi[v])) + [v]
    out = [chain[0]]
    for c in chain[1:]:
        if c != out[-1]:
            out.append(c)
    return out


def _weighted_apsp(wg: WeightedGraph) -> np.ndarray:
    k = len(wg.vertices)
    if k == 0:
        return np.zeros((0, 0))
    pos = {v: i for i, v in enumerate(wg.vertices)}
    rows = [pos[a] for a, _ in wg.edges]
    cols = [pos[b] for _, b in wg.edges]
    data = list(wg.edges.values())
    mat = coo_matrix((data, (rows, cols)), shape=(k, k)).tocsr()
    return dijkstra(mat, directed=False)


def check_sparsify_preserves(before: WeightedGraph, after: WeightedGraph) -> VerificationReport:
    """Same vertices, ``after`` edges a subset of ``before`` and identical all-pairs distances."""
    rep = VerificationReport("sparsify_preserves")
    with _Timer(rep):
        if tuple(before.vertices) != tuple(after.vertices):
            rep.add(None, None, len(before.vertices), len(after.vertices), reason="vertex sets differ")
            return rep
        for e, w in after.edges.items():
            if before.edges.get(e) != w:
                rep.add(e[0], e[1], before.edges.get(e), w, reason="edge not in input")
        A, B = _weighted_apsp(before), _weighted_apsp(after)
        k = len(before.vertices)
        iu = np.triu_indices(k, 1)
        rep.pairs_checked = len(iu[0])
        bad = np.flatnonzero(A[iu] != B[iu])
        for i in bad:
            a, b = int(iu[0][i]), int(iu[1][i])
            fmt = lambda x: int(x) if math.isfinite(x) else "UNREACHABLE"
            rep.add(before.vertices[a], before.vertices[b], fmt(A[a, b]), fmt(B[a, b]))
        rep.details["removed"] = before.n_edges - after.n_edges
    return rep


def _distance_avoiding(wg: WeightedGraph, s: int, t: int, bound: int) -> float:
    """Shortest s-t distance not using edge (s, t); stops once past ``bound``."""
    adj = wg.adj
    heap = [(0, s)]
    seen = set()
    while heap:
        d, v = heapq.heappop(heap)
        if d > bound:
            break
        if v == t:
            return d
        if v in seen:
            continue
        seen.add(v)
        for w, wt in adj[v].items():
            if v == s and w == t:
                continue
            if w not in seen:
                heapq.heappush(heap, (d + wt, w))
    return math.inf


def check_sparsify_tight(wg: WeightedGraph) -> VerificationReport:
    """Deleting any single edge (u, v) strictly increases d(u, v) in the weighted graph."""
    rep = VerificationReport("sparsify_tight")
    with _Timer(rep):
        for (u, v), w in sorted(wg.edges.items()):
            rep.pairs_checked += 1
            alt = _distance_avoiding(wg, u, v, w)
            if alt <= w:
                rep.add(u, v, f"> {w}", int(alt), reason="edge is redundant")
    return rep


@dataclass
class ChainReport:
    i: int
    min_gate_prev: int | None = None
    min_skip: int | None = None
    min_gate_next: int | None = None
    valid: bool = False
    error: str | None = None

    @property
    def prev_ge_skip(self) -> bool:
        return self.valid and self.min_gate_prev >= self.min_skip

    @property
    def skip_ge_next(self) -> bool:
        return self.valid and self.min_skip >= self.min_gate_next

    @property
    def holds(self) -> bool:
        return self.prev_ge_skip and self.skip_ge_next

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(prev_ge_skip=self.prev_ge_skip, skip_ge_next=self.skip_ge_next, holds=self.holds)
        return d


def check_chain(g: Graph, i: int, budget: int = 2_000_000, oracle: DistanceOracle | None = None) -> ChainReport:
    """Exact minima of gate(i-1), k-skip(i) and gate(i+1) covers, and the ordering between them."""
    if i < 3:
        raise ValueError(f"chain check needs i >= 3, got {i}")
    rep = ChainReport(i)
    if oracle is None:
        oracle = apsp_oracle(g)
    try:
        rep.min_gate_prev = len(exact_solve(build_instance_oracle(g, i - 1, Mode.GATE, oracle), budget))
        rep.min_skip = len(exact_solve(build_instance_oracle(g, i, Mode.KSKIP, oracle), budget))
        rep.min_gate_next = len(exact_solve(build_instance_oracle(g, i + 1, Mode.GATE, oracle), budget))
        rep.valid = True
    except ResourceGuardError as exc:
        rep.error = str(exc)
    return rep


@dataclass(frozen=True)
class ApproxRecord:
    greedy: int
    exact: int
    ratio: float
    bound: float | None
    within_bound: bool

    def as_dict(self) -> dict:
        return asdict(self)


def approx_report(inst: CoverInstance, budget: int = 2_000_000) -> ApproxRecord:
    """Greedy versus exact cover size against the ``ln|U| + 1`` guarantee."""
    if not inst.ground:
        return ApproxRecord(0, 0, 1.0, None, True)
    greedy = len(greedy_solve(inst)[0])
    exact = len(exact_solve(inst, budget))
    bound = math.log(len(inst.ground)) + 1
    return ApproxRecord(greedy, exact, greedy / exact, bound, greedy <= bound * exact + 1e-9)


def size_bound_hint(n: int, epsilon: int) -> float:
    """Shape ``n/(eps-1) * ln(n/(eps-1))`` of the known size bound; logged, never asserted."""
    r = n / (epsilon - 1)
    return r * math.log(r) if r > 1 else r


def verify_all(g: Graph, epsilon: int, gate_set, wg_stage1: WeightedGraph, wg_sparse: WeightedGraph | None,
               sample: int | None = None) -> list[VerificationReport]:
    """Cover check, recovery on both gate graphs and sparsification safety, sharing one oracle."""
    oracle = apsp_oracle(g)
    verts = gate_set.vertices
    if gate_set.mode is Mode.GATE:
        reports = [check_gate_cover(g, gate_set.param, verts, oracle)]
    else:
        reports = [check_kskip_cover(g, gate_set.param, verts, oracle),
                   check_gate_cover(g, epsilon, verts, oracle)]
    rec = check_recovery(g, epsilon, verts, wg_stage1, oracle, sample=sample)
    rec.check = "recovery_stage1"
    reports.append(rec)
    if wg_sparse is not None:
        rec = check_recovery(g, epsilon, verts, wg_sparse, oracle, sample=sample)
        rec.check = "recovery_sparsified"
        reports.append(rec)
        reports.append(check_sparsify_preserves(wg_stage1, wg_sparse))
    return reports


def cross_check_builders(g: Graph, epsilon: int) -> bool:
    """BFS-built and oracle-built gate instances coincide."""
    return build_instance_bfs(g, epsilon).same_as(build_instance_oracle(g, epsilon, Mode.GATE))
