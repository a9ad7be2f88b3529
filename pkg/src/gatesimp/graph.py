"""Unweighted undirected graphs: storage, ingestion, generation, BFS and the APSP oracle."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import GraphParseError, ResourceGuardError

UNREACHABLE = -1
APSP_MAX_N = 20000


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable adjacency structure over vertices ``0..n-1``.

    ``adj[v]`` is a strictly ascending tuple of neighbours. ``labels[v]`` is the
    external label of vertex ``v`` (defaults to ``str(v)``).
    """

    n: int
    adj: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(v) for v in range(self.n)))

    @cached_property
    def m(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def edges(self):
        for u, nbrs in enumerate(self.adj):
            for v in nbrs:
                if u < v:
                    yield u, v

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.adj[u]
        i = _bisect(nbrs, v)
        return i < len(nbrs) and nbrs[i] == v

    @cached_property
    def label_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def vertex(self, label: str) -> int:
        try:
            return self.label_index[str(label)]
        except KeyError:
            raise ValueError(f"unknown vertex label {label!r}") from None

    @cached_property
    def csr(self) -> csr_matrix:
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adj])
        indices = np.fromiter((v for a in self.adj for v in a), dtype=np.int32, count=int(indptr[-1]))
        data = np.ones(len(indices), dtype=np.int8)
        return csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def check_vertex(self, v: int, name: str = "vertex") -> None:
        if not (0 <= v < self.n):
            raise ValueError(f"{name} {v} out of range for graph with {self.n} vertices")

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _bisect(seq, x):
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        if seq[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def from_edges(n: int, edges: Iterable[tuple[int, int]], labels: Iterable[str] | None = None) -> Graph:
    """Build a graph, silently dropping self-loops and duplicate edges."""
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if u == v:
            continue
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        nbrs[u].add(v)
        nbrs[v].add(u)
    adj = tuple(tuple(sorted(s)) for s in nbrs)
    return Graph(n, adj, tuple(labels) if labels is not None else ())


@dataclass(frozen=True)
class LoadCounts:
    raw_lines: int
    dedup_edges: int
    dropped_self_loops: int
    comment_lines: int = 0


def load_edge_list(source: TextIO | Iterable[str]) -> tuple[Graph, LoadCounts]:
    """Parse a whitespace-separated edge list (SNAP style, ``#`` comments).

    Labels are densified to ids in order of first appearance.
    """
    ids: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    raw = comments = loops = 0
    for line_no, line in enumerate(source, start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            comments += 1
            continue
        toks = s.split()
        if len(toks) != 2:
            raise GraphParseError(line_no, line.rstrip("\n"))
        raw += 1
        a, b = (ids.setdefault(t, len(ids)) for t in toks)
        if a == b:
            loops += 1
            continue
        edges.append((a, b))
    labels = [None] * len(ids)
    for lab, i in ids.items():
        labels[i] = lab
    g = from_edges(len(ids), edges, labels)
    return g, LoadCounts(raw, g.m, loops, comments)


def write_edge_list(g: Graph, fh: TextIO) -> None:
    for u, v in g.edges():
        fh.write(f"{g.labels[u]} {g.labels[v]}\n")


def write_label_table(g: Graph, fh: TextIO) -> None:
    for i, lab in enumerate(g.labels):
        fh.write(f"{lab}\t{i}\n")


def bounded_bfs(g: Graph, source: int, limit: int | None = None) -> dict[int, int]:
    """Hop levels of every vertex within ``limit`` hops of ``source`` (all reachable if None)."""
    g.check_vertex(source, "source")
    if limit is not None and limit < 0:
        raise ValueError("limit must be non-negative")
    level = {source: 0}
    queue = deque([source])
    adj = g.adj
    while queue:
        u = queue.popleft()
        lu = level[u]
        if limit is not None and lu >= limit:
            continue
        for w in adj[u]:
            if w not in level:
                level[w] = lu + 1
                queue.append(w)
    return level


@dataclass(frozen=True, eq=False)
class DistanceOracle:
    """Dense all-pairs hop distances; ``UNREACHABLE`` (-1) marks disconnected pairs."""

    dist: np.ndarray

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __call__(self, u: int, v: int) -> int:
        return int(self.dist[u, v])

    def pairs_at(self, d: int) -> np.ndarray:
        """Unordered pairs (u < v) at distance exactly ``d``, as a (k, 2) array sorted by (u, v)."""
        us, vs = np.nonzero(np.triu(self.dist == d, k=1))
        return np.stack([us, vs], axis=1)


def _bfs_rows(g: Graph, sources) -> np.ndarray:
    d = shortest_path(g.csr, method="D", directed=False, unweighted=True, indices=sources)
    d = np.atleast_2d(d)
    out = np.full(d.shape, UNREACHABLE, dtype=np.int32)
    finite = np.isfinite(d)
    out[finite] = d[finite]
    return out


def apsp_oracle(g: Graph, max_n: int = APSP_MAX_N, chunk: int = 1024) -> DistanceOracle:
    """All-pairs hop distances, one BFS per source.

    Raises ResourceGuardError when ``g.n`` exceeds ``max_n``.
    """
    if g.n > max_n:
        raise ResourceGuardError("apsp_max_n", f"graph has {g.n} vertices, guard allows {max_n}")
    dtype = np.int16 if g.n < np.iinfo(np.int16).max else np.int32
    dist = np.empty((g.n, g.n), dtype=dtype)
    for start in range(0, g.n, chunk):
        idx = np.arange(start, min(start + chunk, g.n))
        dist[idx] = _bfs_rows(g, idx)
    dist.setflags(write=False)
    return DistanceOracle(dist)


# -- generators -------------------------------------------------------------

def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def gen_er(n: int, density: float, seed: int) -> Graph:
    """Uniform random graph with exactly ``round(density * n)`` edges (G(n, m) model)."""
    m = _round_half_up(density * n)
    total = n * (n - 1) // 2
    if n < 0 or m < 0 or m > total:
        raise ValueError(f"cannot place {m} edges on {n} vertices (max {total})")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(total, size=m, replace=False)) if m else np.empty(0, dtype=np.int64)
    # pair index k -> (i, j), i < j, rows laid out as i=0: j=1..n-1, i=1: j=2..n-1, ...
    row_start = np.array([i * (2 * n - i - 1) // 2 for i in range(n)], dtype=np.int64)
    rows = np.searchsorted(row_start, picks, side="right") - 1
    cols = picks - row_start[rows] + rows + 1
    return from_edges(n, zip(rows.tolist(), cols.tolist()))


def gen_scale_free(n: int, density: float, seed: int) -> Graph:
    """Preferential-attachment graph grown from a clique of ``round(density) + 1`` vertices.

    Every later vertex attaches ``round(density)`` distinct edges, choosing targets with
    probability proportional to their current degree. Edge count is
    ``k*(k+1)/2 + k*(n-k-1)`` with ``k = round(density)``.
    """
    k = _round_half_up(density)
    if density < 1 or k < 1:
        raise ValueError("scale-free generator needs density >= 1")
    if n <= k:
        raise ValueError(f"need n > density (n={n}, density={density})")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(k + 1) for j in range(i + 1, k + 1)]
    # each vertex appears once per incident edge end
    ends = [v for e in edges for v in e]
    for v in range(k + 1, n):
        targets: set[int] = set()
        while len(targets) < k:
            targets.add(ends[int(rng.integers(len(ends)))])
        for t in sorted(targets):
            edges.append((t, v))
            ends.extend((t, v))
    return from_edges(n, edges)


def path_graph(n: int) -> Graph:
    return from_edges(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def star_graph(n: int) -> Graph:
    """Star with centre 0 and ``n - 1`` leaves."""
    return from_edges(n, ((0, i) for i in range(1, n)))


def complete_graph(n: int) -> Graph:
    return from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


FAMILIES = {
    "er": gen_er,
    "sf": gen_scale_free,
    "path": lambda n, density=None, seed=None: path_graph(n),
    "cycle": lambda n, density=None, seed=None: cycle_graph(n),
    "star": lambda n, density=None, seed=None: star_graph(n),
    "complete": lambda n, density=None, seed=None: complete_graph(n),
}


def generate(family: str, n: int, density: float | None = None, seed: int | None = None) -> Graph:
    try:
        fn = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    if family in ("er", "sf"):
        if density is None:
            raise ValueError(f"family {family!r} needs a density")
        return fn(n, density, 0 if seed is None else seed)
    return fn(n)


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> Graph:
    keep = sorted(set(vertices))
    remap = {v: i for i, v in enumerate(keep)}
    edges = ((remap[u], remap[v]) for u, v in g.edges() if u in remap and v in remap)
    return from_edges(len(keep), edges, [g.labels[v] for v in keep])


def largest_component(g: Graph) -> Graph:
    if g.n == 0:
        return g
    _, comp = connected_components(g.csr, directed=False)
    biggest = np.bincount(comp).argmax()
    return induced_subgraph(g, np.flatnonzero(comp == biggest).tolist())


# -- statistics ---------------------------------------------------------------

@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    diameter: int
    avg_dist: float
    components: int
    exact: bool
    sources: int

    def as_dict(self, doubled_edges: bool = False) -> dict:
        d = {
            "n": self.n,
            "m": self.m,
            "diameter": self.diameter,
            "avg_dist": round(self.avg_dist, 6),
            "components": self.components,
            "exact": self.exact,
            "sources": self.sources,
        }
        if doubled_edges:
            d["m_doubled"] = 2 * self.m
        return d


def graph_stats(g: Graph, exact: bool = True, samples: int = 64, seed: int = 0,
                max_n: int = APSP_MAX_N, chunk: int = 512) -> GraphStats:
    """Diameter and mean distance over connected ordered pairs.

    Sampled mode runs BFS from ``max(samples, 64)`` random sources and flags the result
    as an estimate.
    """
    if g.n == 0:
        return GraphStats(0, 0, 0, 0.0, 0, exact, 0)
    ncomp, _ = connected_components(g.csr, directed=False)
    if exact:
        if g.n > max_n:
            raise ResourceGuardError("apsp_max_n", f"exact stats need APSP; {g.n} > {max_n}")
        sources = np.arange(g.n)
    else:
        rng = np.random.default_rng(seed)
        k = min(g.n, max(samples, 64))
        sources = np.sort(rng.choice(g.n, size=k, replace=False))
    diam, total, count = 0, 0, 0
    for start in range(0, len(sources), chunk):
        rows = _bfs_rows(g, sources[start:start + chunk])
        pos = rows[rows > 0]
        if pos.size:
            diam = max(diam, int(pos.max()))
            total += int(pos.sum(dtype=np.int64))
            count += int(pos.size)
    avg = total / count if count else 0.0
    return GraphStats(g.n, g.m, diam, avg, int(ncomp), exact, len(sources))
