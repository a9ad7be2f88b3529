"""Weighted gate graphs: local-gate construction, edge sparsification and distance queries."""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np

from .gates import GateVertexSet
from .graph import UNREACHABLE, Graph, bounded_bfs
from .setcover import Mode


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph on a subset of original vertices; ``edges`` maps ``(a, b)``, ``a < b``, to a weight."""

    vertices: tuple[int, ...]
    edges: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        vs = set(self.vertices)
        for (a, b), w in self.edges.items():
            if a >= b:
                raise ValueError(f"edge key ({a}, {b}) must be ordered with a < b")
            if a not in vs or b not in vs:
                raise ValueError(f"edge ({a}, {b}) touches a vertex outside the graph")
            if w < 1:
                raise ValueError(f"edge ({a}, {b}) has non-positive weight {w}")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adj(self) -> dict[int, dict[int, int]]:
        out: dict[int, dict[int, int]] = {v: {} for v in self.vertices}
        for (a, b), w in self.edges.items():
            out[a][b] = w
            out[b][a] = w
        return out

    def weight(self, a: int, b: int) -> int | None:
        return self.edges.get((a, b) if a < b else (b, a))

    def without_edge(self, a: int, b: int) -> "WeightedGraph":
        key = (a, b) if a < b else (b, a)
        return WeightedGraph(self.vertices, {e: w for e, w in self.edges.items() if e != key})

    def dump(self, fh: TextIO, labels=None) -> None:
        lab = (lambda v: labels[v]) if labels is not None else str
        fh.write(f"# {len(self.vertices)} gates, {len(self.edges)} edges\n")
        for (a, b), w in sorted(self.edges.items()):
            fh.write(f"{lab(a)} {lab(b)} {w}\n")


def load_weighted(fh: TextIO, g: Graph, vertices: Iterable[int]) -> WeightedGraph:
    edges = {}
    for line in fh:
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        a, b, w = s.split()
        u, v = g.vertex(a), g.vertex(b)
        edges[(min(u, v), max(u, v))] = int(w)
    return WeightedGraph(tuple(sorted(vertices)), edges)


def _gate_vertices(gates) -> list[int]:
    return sorted(gates.vertices if isinstance(gates, GateVertexSet) else set(gates))


def build_local_gate_graph(g: Graph, gates: GateVertexSet | Iterable[int], epsilon: int) -> WeightedGraph:
    """Connect every pair of gates closer than ``epsilon`` with weight equal to their hop distance."""
    if isinstance(gates, GateVertexSet) and (gates.mode is not Mode.GATE or gates.param != epsilon):
        raise ValueError(f"gate set is {gates.mode.value}({gates.param}); expected gate({epsilon})")
    verts = _gate_vertices(gates)
    for v in verts:
        g.check_vertex(v, "gate")
    is_gate = set(verts)
    edges = {}
    for u in verts:
        for v, d in bounded_bfs(g, u, epsilon - 1).items():
            if v > u and v in is_gate:
                edges[(u, v)] = d
    return WeightedGraph(tuple(verts), edges)


def sparsify(wg: WeightedGraph) -> WeightedGraph:
    """Drop every edge (u, v) with a common neighbour x where w(u,x) + w(x,v) = w(u,v).

    All flags are computed against the input edge set, then removed together.
    """
    adj = wg.adj
    flagged = set()
    for (u, v), w in wg.edges.items():
        nu, nv = adj[u], adj[v]
        if len(nu) > len(nv):
            nu, nv = nv, nu
        for x, wx in nu.items():
            wy = nv.get(x)
            if wy is not None and wx + wy == w:
                flagged.add((u, v))
                break
    return WeightedGraph(wg.vertices, {e: w for e, w in wg.edges.items() if e not in flagged})


def gate_sssp(wg: WeightedGraph, sources: dict[int, int], bound: float = float("inf")):
    """Multi-source Dijkstra seeded with ``sources`` (vertex -> initial distance).

    Returns ``(dist, pred, origin)`` dictionaries over settled vertices with distance <= bound.
    """
    adj = wg.adj
    dist: dict[int, int] = {}
    pred: dict[int, int | None] = {}
    origin: dict[int, int] = {}
    heap = [(d, s, s, None) for s, d in sources.items()]
    heapq.heapify(heap)
    while heap:
        d, v, src, p = heapq.heappop(heap)
        if v in dist:
            continue
        if d > bound:
            break
        dist[v], pred[v], origin[v] = d, p, src
        for w, wt in adj[v].items():
            if w not in dist:
                heapq.heappush(heap, (d + wt, w, src, v))
    return dist, pred, origin


def gate_dijkstra(wg: WeightedGraph, x: int, y: int) -> int:
    adj = wg.adj
    for v, name in ((x, "x"), (y, "y")):
        if v not in adj:
            raise ValueError(f"{name}={v} is not a vertex of the gate graph")
    if x == y:
        return 0
    heap = [(0, x)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v == y:
            return d
        if v in done:
            continue
        done.add(v)
        for w, wt in adj[v].items():
            if w not in done:
                heapq.heappush(heap, (d + wt, w))
    return UNREACHABLE


def gate_path(pred: dict[int, int | None], y: int) -> list[int]:
    path = [y]
    while pred[path[-1]] is not None:
        path.append(pred[path[-1]])
    return path[::-1]


def gate_apsp(wg: WeightedGraph):
    """Distances and predecessor rows among gates, indexed by position in ``wg.vertices``.

    Unreachable entries are ``inf`` (distance) and -1 (predecessor).
    """
    verts = wg.vertices
    pos = {v: i for i, v in enumerate(verts)}
    k = len(verts)
    dist = np.full((k, k), np.inf)
    pred = np.full((k, k), -1, dtype=np.int64)
    for i, s in enumerate(verts):
        d, p, _ = gate_sssp(wg, {s: 0})
        for v, dv in d.items():
            j = pos[v]
            dist[i, j] = dv
            pred[i, j] = -1 if p[v] is None else pos[p[v]]
    return dist, pred


class RouteKind(str, enum.Enum):
    LOCAL = "LOCAL"
    VIA_GATES = "VIA_GATES"
    NONE = "NONE"


@dataclass(frozen=True)
class QueryResult:
    distance: int
    route: RouteKind
    witness: tuple[int, int] | None = None

    @property
    def reachable(self) -> bool:
        return self.distance != UNREACHABLE

    def as_dict(self, labels=None) -> dict:
        lab = (lambda v: labels[v]) if labels is not None else (lambda v: v)
        out = {"distance": self.distance if self.reachable else "UNREACHABLE",
               "route": self.route.value if self.reachable else None}
        if self.witness is not None:
            out["witness"] = [lab(self.witness[0]), lab(self.witness[1])]
        return out


def _ball_gates(g: Graph, v: int, epsilon: int, is_gate) -> tuple[dict[int, int], dict[int, int]]:
    ball = bounded_bfs(g, v, epsilon - 1)
    return ball, {x: d for x, d in ball.items() if x in is_gate}


def query_distance(g: Graph, gates: GateVertexSet | Iterable[int], wg: WeightedGraph,
                   u: int, v: int, epsilon: int) -> QueryResult:
    """Exact distance via ``min d(u,x) + d(x,y|G*) + d(y,v)`` over gates within ``epsilon - 1`` hops.

    Pairs closer than ``epsilon`` are answered directly from the local BFS.
    """
    g.check_vertex(u, "u")
    g.check_vertex(v, "v")
    is_gate = set(_gate_vertices(gates))
    ball_u, xs = _ball_gates(g, u, epsilon, is_gate)
    if v in ball_u:
        return QueryResult(ball_u[v], RouteKind.LOCAL)
    _, ys = _ball_gates(g, v, epsilon, is_gate)
    if not xs or not ys:
        return QueryResult(UNREACHABLE, RouteKind.NONE)
    adj = wg.adj
    best, witness = None, None
    heap = [(d, x, x) for x, d in xs.items()]
    heapq.heapify(heap)
    settled = set()
    while heap:
        d, y, x = heapq.heappop(heap)
        if best is not None and d >= best:
            break
        if y in settled:
            continue
        settled.add(y)
        tail = ys.get(y)
        if tail is not None and (best is None or d + tail < best):
            best, witness = d + tail, (x, y)
        for w, wt in adj.get(y, {}).items():
            if w not in settled:
                heapq.heappush(heap, (d + wt, w, x))
    if best is None:
        return QueryResult(UNREACHABLE, RouteKind.NONE)
    return QueryResult(best, RouteKind.VIA_GATES, witness)


class GateQueryIndex:
    """Batch form of :func:`query_distance` with every vertex's gate ball materialised.

    ``ball[v, i]`` holds the hop distance from ``v`` to gate ``i`` if it is below
    ``epsilon``, else ``inf``.
    """

    def __init__(self, g: Graph, gates: GateVertexSet | Iterable[int], wg: WeightedGraph, epsilon: int):
        self.g, self.wg, self.epsilon = g, wg, epsilon
        self.gates = _gate_vertices(gates)
        if tuple(self.gates) != tuple(wg.vertices):
            raise ValueError("gate graph vertices do not match the gate set")
        self.pos = {x: i for i, x in enumerate(self.gates)}
        k = len(self.gates)
        self.ball = np.full((g.n, k), np.inf)
        self.local = []
        for v in range(g.n):
            b = bounded_bfs(g, v, epsilon - 1)
            self.local.append(b)
            for x, d in b.items():
                i = self.pos.get(x)
                if i is not None:
                    self.ball[v, i] = d
        self.gdist, self.gpred = gate_apsp(wg)

    def row(self, u: int):
        """Recovered distances from ``u`` to every vertex through gates.

        Returns ``(dist, x_idx, y_idx)`` arrays; ``dist`` is ``inf`` where no gate route exists.
        """
        n, k = self.ball.shape
        if k == 0:
            return np.full(n, np.inf), np.full(n, -1), np.full(n, -1)
        xs = np.flatnonzero(np.isfinite(self.ball[u]))
        if xs.size == 0:
            return np.full(n, np.inf), np.full(n, -1), np.full(n, -1)
        via = self.ball[u, xs][:, None] + self.gdist[xs]
        arg_x = via.argmin(axis=0)
        to_y = via[arg_x, np.arange(k)]
        total = to_y[None, :] + self.ball
        arg_y = total.argmin(axis=1)
        dist = total[np.arange(n), arg_y]
        return dist, xs[arg_x[arg_y]], arg_y

    def query(self, u: int, v: int) -> QueryResult:
        if v in self.local[u]:
            return QueryResult(self.local[u][v], RouteKind.LOCAL)
        dist, xi, yi = self.row(u)
        if not np.isfinite(dist[v]):
            return QueryResult(UNREACHABLE, RouteKind.NONE)
        return QueryResult(int(dist[v]), RouteKind.VIA_GATES, (self.gates[xi[v]], self.gates[yi[v]]))

    def gate_chain(self, xi: int, yi: int) -> list[int]:
        """Gate vertices on the stored shortest gate-graph path between gate indices."""
        path = [yi]
        while path[-1] != xi:
            p = self.gpred[xi, path[-1]]
            if p < 0:
                raise ValueError("gates are disconnected in the gate graph")
            path.append(int(p))
        return [self.gates[i] for i in reversed(path)]
