"""Gate-vertex set and k-skip cover discovery: set-cover greedy (SC), adaptive sampling (FS), exact."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .errors import GateSimpError
from .graph import Graph
from .setcover import Mode, build_instance_bfs, build_instance_oracle, exact_solve, greedy_solve


class Method(str, enum.Enum):
    SC = "sc"
    FS = "fs"
    EXACT = "exact"


class SelfCheckError(GateSimpError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"self-check {report.check} failed with {report.n_violations} violation(s)")


@dataclass(frozen=True)
class GateVertexSet:
    vertices: frozenset[int]
    mode: Mode
    param: int
    method: Method
    stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.param < 2:
            raise ValueError(f"mode parameter must be >= 2, got {self.param}")

    @property
    def size(self) -> int:
        return len(self.vertices)

    def __contains__(self, v) -> bool:
        return v in self.vertices

    def sorted(self) -> list[int]:
        return sorted(self.vertices)

    def dump(self, fh: TextIO, labels=None) -> None:
        fh.write(f"{self.mode.value} {self.param} {self.method.value} {self.size}\n")
        for v in self.sorted():
            fh.write(f"{labels[v] if labels is not None else v}\n")


def gate_set(vertices: Iterable[int], epsilon: int, method: Method | str = Method.EXACT) -> GateVertexSet:
    """Tag an arbitrary vertex set as a gate set at ``epsilon`` (no validation)."""
    return GateVertexSet(frozenset(vertices), Mode.GATE, epsilon, Method(method))


def load_gate_set(fh: TextIO, g: Graph) -> GateVertexSet:
    mode, param, method, size = fh.readline().split()
    verts = [g.vertex(line.strip()) for line in fh if line.strip()]
    if len(verts) != int(size):
        raise ValueError(f"gate file header says {size} vertices, found {len(verts)}")
    return GateVertexSet(frozenset(verts), Mode(mode), int(param), Method(method))


def _self_check(g: Graph, gs: GateVertexSet) -> None:
    from .verify import check_gate_cover, check_kskip_cover

    check = check_gate_cover if gs.mode is Mode.GATE else check_kskip_cover
    report = check(g, gs.param, gs.vertices)
    if not report.passed:
        raise SelfCheckError(report)


def discover_sc(g: Graph, epsilon: int, self_check: bool = True) -> GateVertexSet:
    t0 = time.perf_counter()
    inst = build_instance_bfs(g, epsilon)
    sol, trace = greedy_solve(inst)
    ms = (time.perf_counter() - t0) * 1000
    gs = GateVertexSet(frozenset(sol), Mode.GATE, epsilon, Method.SC,
                       {"size": len(sol), "build_ms": ms, "ground": len(inst.ground), "picks": trace.size})
    if self_check:
        _self_check(g, gs)
    return gs


def _tree_leaves_covered(g: Graph, root: int, depth: int, chosen: set[int] | bytearray) -> bool:
    """True when every root-to-leaf path of the depth-``depth`` BFS tree hits ``chosen``.

    Tree parent of a vertex is its smallest-id neighbour one level closer to the root.
    """
    adj = g.adj
    level = {root: 0}
    covered = {root: bool(chosen[root])}
    frontier = [root]
    for d in range(1, depth + 1):
        nxt = []
        for z in frontier:
            for w in adj[z]:
                if w not in level:
                    level[w] = d
                    nxt.append(w)
        if not nxt:
            return True
        for w in nxt:
            parent = next(z for z in adj[w] if level.get(z) == d - 1)
            covered[w] = bool(chosen[w]) or covered[parent]
        frontier = nxt
    return all(covered[w] for w in frontier)


def discover_fs(g: Graph, epsilon: int, self_check: bool = True) -> GateVertexSet:
    """Adaptive sampling: visit vertices by descending degree and keep any whose
    depth-``(epsilon-2)`` shortest-path tree has a root-to-leaf path with no chosen vertex.

    The result is an ``(epsilon-1)``-skip cover and hence a gate set at ``epsilon``.
    """
    if epsilon < 3:
        raise ValueError(f"FS needs epsilon >= 3, got {epsilon}")
    t0 = time.perf_counter()
    order = sorted(range(g.n), key=lambda v: (-g.degree(v), v))
    chosen = bytearray(g.n)
    picked = []
    for u in order:
        if not _tree_leaves_covered(g, u, epsilon - 2, chosen):
            chosen[u] = 1
            picked.append(u)
    ms = (time.perf_counter() - t0) * 1000
    gs = GateVertexSet(frozenset(picked), Mode.GATE, epsilon, Method.FS,
                       {"size": len(picked), "build_ms": ms})
    if self_check:
        _self_check(g, gs)
    return gs


def discover_kskip(g: Graph, k: int, method: Method | str = Method.SC, self_check: bool = True,
                   budget: int = 2_000_000) -> GateVertexSet:
    method = Method(method)
    if method is Method.FS:
        raise ValueError("k-skip discovery supports methods sc and exact")
    t0 = time.perf_counter()
    inst = build_instance_oracle(g, k, Mode.KSKIP)
    sol = greedy_solve(inst)[0] if method is Method.SC else exact_solve(inst, budget)
    ms = (time.perf_counter() - t0) * 1000
    gs = GateVertexSet(frozenset(sol), Mode.KSKIP, k, method,
                       {"size": len(sol), "build_ms": ms, "ground": len(inst.ground)})
    if self_check:
        _self_check(g, gs)
    return gs


def discover_exact(g: Graph, epsilon: int, budget: int = 2_000_000, self_check: bool = True) -> GateVertexSet:
    """Minimum gate set at ``epsilon`` (tiny graphs only)."""
    t0 = time.perf_counter()
    inst = build_instance_bfs(g, epsilon)
    sol = exact_solve(inst, budget)
    ms = (time.perf_counter() - t0) * 1000
    gs = GateVertexSet(frozenset(sol), Mode.GATE, epsilon, Method.EXACT,
                       {"size": len(sol), "build_ms": ms, "ground": len(inst.ground)})
    if self_check:
        _self_check(g, gs)
    return gs


def discover(g: Graph, param: int, method: Method | str = Method.SC, mode: Mode | str = Mode.GATE,
             self_check: bool = True, budget: int = 2_000_000) -> GateVertexSet:
    method, mode = Method(method), Mode(mode)
    if mode is Mode.KSKIP:
        return discover_kskip(g, param, method, self_check=self_check, budget=budget)
    if method is Method.SC:
        return discover_sc(g, param, self_check=self_check)
    if method is Method.FS:
        return discover_fs(g, param, self_check=self_check)
    return discover_exact(g, param, budget=budget, self_check=self_check)
