"""Set-cover encoding of gate-vertex and k-skip cover discovery, plus greedy and exact solvers.

Ground elements are unordered vertex pairs stored as ``(a, b)`` tuples with ``a < b``.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .errors import InfeasibleCoverError, ResourceGuardError
from .graph import APSP_MAX_N, DistanceOracle, Graph, apsp_oracle

Pair = tuple[int, int]


class Mode(str, enum.Enum):
    GATE = "gate"
    KSKIP = "kskip"


def pair_key(a: int, b: int) -> Pair:
    if a == b:
        raise ValueError(f"pair endpoints must differ, got ({a}, {b})")
    return (a, b) if a < b else (b, a)


@dataclass(eq=False)
class CoverInstance:
    """Ground set of pairs plus the candidate set ``C_x`` of each vertex.

    ``candidates`` only holds vertices with a non-empty set; use :meth:`candidate`.
    """

    mode: Mode
    param: int
    n: int
    ground: set[Pair] = field(default_factory=set)
    candidates: dict[int, set[Pair]] = field(default_factory=dict)

    def candidate(self, x: int) -> set[Pair]:
        return self.candidates.get(x, set())

    def same_as(self, other: "CoverInstance") -> bool:
        return (self.mode == other.mode and self.param == other.param and self.ground == other.ground
                and {x: s for x, s in self.candidates.items() if s}
                == {x: s for x, s in other.candidates.items() if s})

    def uncoverable(self) -> list[Pair]:
        reach: set[Pair] = set()
        for s in self.candidates.values():
            reach |= s
        return sorted(self.ground - reach)

    def dump(self, fh: TextIO, labels=None) -> None:
        """Text form: header ``mode param |U|``, ground pairs, then ``x: a b, a b, ...`` lines."""
        lab = (lambda v: labels[v]) if labels is not None else str
        fh.write(f"{self.mode.value} {self.param} {len(self.ground)}\n")
        for a, b in sorted(self.ground):
            fh.write(f"{lab(a)} {lab(b)}\n")
        for x in sorted(self.candidates):
            pairs = sorted(self.candidates[x])
            if pairs:
                fh.write(f"{lab(x)}: " + ", ".join(f"{lab(a)} {lab(b)}" for a, b in pairs) + "\n")


def load_instance(fh: TextIO, n: int | None = None) -> CoverInstance:
    """Inverse of :meth:`CoverInstance.dump` for integer labels."""
    header = fh.readline().split()
    mode, param, size = Mode(header[0]), int(header[1]), int(header[2])
    ground = set()
    for _ in range(size):
        a, b = fh.readline().split()
        ground.add(pair_key(int(a), int(b)))
    cands: dict[int, set[Pair]] = {}
    top = -1
    for line in fh:
        if not line.strip():
            continue
        head, _, rest = line.partition(":")
        x = int(head)
        top = max(top, x)
        cands[x] = {pair_key(*map(int, p.split())) for p in rest.split(",") if p.strip()}
    for a, b in ground:
        top = max(top, b)
    return CoverInstance(mode, param, n if n is not None else top + 1, ground, cands)


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def build_instance_bfs(g: Graph, epsilon: int) -> CoverInstance:
    """Gate-mode instance via one depth-``epsilon`` BFS per source.

    ``I(v)``, the intermediates on shortest paths from the source to ``v``, is the union of
    ``I(z) | {z}`` over every predecessor ``z`` one level up; level-1 vertices have none.
    Each pair is emitted from its smaller endpoint only.
    """
    if epsilon < 2:
        raise ValueError(f"epsilon={epsilon} is infeasible: pairs closer than 2 hops have no intermediate vertex")
    adj = g.adj
    ground: set[Pair] = set()
    cands: dict[int, set[Pair]] = {}
    for u in range(g.n):
        level = {u: 0}
        frontier = [u]
        inter: dict[int, int] = {}
        for depth in range(1, epsilon + 1):
            nxt = []
            for z in frontier:
                for w in adj[z]:
                    if w not in level:
                        level[w] = depth
                        nxt.append(w)
            if not nxt:
                break
            if depth == 1:
                for w in nxt:
                    inter[w] = 0
            else:
                for w in nxt:
                    acc = 0
                    for z in adj[w]:
                        if level.get(z) == depth - 1:
                            acc |= inter[z] | (1 << z)
                    inter[w] = acc
            frontier = nxt
        else:
            for v in frontier:
                if v <= u:
                    continue
                p = (u, v)
                ground.add(p)
                for x in _iter_bits(inter[v]):
                    s = cands.get(x)
                    if s is None:
                        cands[x] = s = set()
                    s.add(p)
    return CoverInstance(Mode.GATE, epsilon, g.n, ground, cands)


def build_instance_oracle(g: Graph, param: int, mode: Mode | str = Mode.GATE,
                          oracle: DistanceOracle | None = None, max_n: int = APSP_MAX_N) -> CoverInstance:
    """Instance straight from the definitions, using the all-pairs distance table.

    GATE: pairs at distance ``param``, covered by ``x`` off the endpoints with
    ``d(u,x) + d(x,v) = param``. KSKIP: pairs at distance ``param - 1``, endpoints allowed.
    """
    mode = Mode(mode)
    if param < 2:
        raise ValueError(f"{mode.value} mode needs parameter >= 2, got {param}")
    if oracle is None:
        oracle = apsp_oracle(g, max_n=max_n)
    D = oracle.dist.astype(np.int32)
    target = param if mode is Mode.GATE else param - 1
    pairs = oracle.pairs_at(target)
    ground = {(int(a), int(b)) for a, b in pairs}
    cands: dict[int, set[Pair]] = {}
    if len(pairs):
        us, vs = pairs[:, 0], pairs[:, 1]
        for x in range(g.n):
            du, dv = D[x, us], D[x, vs]
            ok = (du >= 0) & (dv >= 0) & (du + dv == target)
            if mode is Mode.GATE:
                ok &= (du > 0) & (dv > 0)
            hit = np.flatnonzero(ok)
            if hit.size:
                cands[x] = {(int(us[i]), int(vs[i])) for i in hit}
    return CoverInstance(mode, param, g.n, ground, cands)


@dataclass(frozen=True)
class Pick:
    vertex: int
    newly_covered: int
    price: float


@dataclass
class GreedyTrace:
    picks: list[Pick] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.picks)


def _check_feasible(inst: CoverInstance) -> None:
    bad = inst.uncoverable()
    if bad:
        raise InfeasibleCoverError(bad, len(bad))


def greedy_solve(inst: CoverInstance) -> tuple[set[int], GreedyTrace]:
    """Greedy set cover choosing the minimum price ``1/|C_x \\ R|`` each round.

    Uses lazy evaluation: heap keys are upper bounds on the current gain and are
    refreshed on pop. Ties go to the smallest vertex id.
    """
    _check_feasible(inst)
    index = {p: i for i, p in enumerate(sorted(inst.ground))}
    members = {x: [index[p] for p in s] for x, s in inst.candidates.items() if s}
    covered = bytearray(len(index))
    remaining = len(index)
    heap = [(-len(ids), x) for x, ids in members.items()]
    heapq.heapify(heap)
    solution: set[int] = set()
    trace = GreedyTrace()
    while remaining:
        key, x = heapq.heappop(heap)
        gain = sum(1 for i in members[x] if not covered[i])
        if gain == 0:
            continue
        if gain < -key:
            # stale upper bound; a fresh key popped first is the true (gain, id) minimum
            heapq.heappush(heap, (-gain, x))
            continue
        for i in members[x]:
            covered[i] = 1
        remaining -= gain
        solution.add(x)
        trace.picks.append(Pick(x, gain, 1.0 / gain))
    return solution, trace


def exact_solve(inst: CoverInstance, budget: int = 2_000_000) -> set[int]:
    """Minimum cover by branch and bound.

    Branches on the uncovered pair with the fewest covering candidates; prunes with
    ``ceil(uncovered / max gain)``. Raises ResourceGuardError after ``budget`` nodes.
    """
    _check_feasible(inst)
    ground = sorted(inst.ground)
    if not ground:
        return set()
    index = {p: i for i, p in enumerate(ground)}
    masks: dict[int, int] = {}
    for x, s in inst.candidates.items():
        mk = 0
        for p in s:
            mk |= 1 << index[p]
        if mk:
            masks[x] = mk
    # drop candidates whose set is contained in another's (keep smallest id on ties)
    verts = sorted(masks, key=lambda x: (-masks[x].bit_count(), x))
    kept: list[int] = []
    for x in verts:
        if not any(masks[x] | masks[y] == masks[y] for y in kept):
            kept.append(x)
    covers_elem: list[list[int]] = [[] for _ in ground]
    for x in kept:
        for i in _iter_bits(masks[x]):
            covers_elem[i].append(x)

    best_sol, _ = greedy_solve(inst)
    best = [len(best_sol), sorted(best_sol)]
    full = (1 << len(ground)) - 1
    nodes = 0

    def search(covered: int, chosen: list[int]):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise ResourceGuardError("exact_budget", f"branch and bound exceeded {budget} nodes")
        if covered == full:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), sorted(chosen)
            return
        unc = full & ~covered
        nunc = unc.bit_count()
        maxgain = max((masks[x] & unc).bit_count() for x in kept)
        if len(chosen) + math.ceil(nunc / maxgain) >= best[0]:
            return
        pivot = min(_iter_bits(unc), key=lambda i: len(covers_elem[i]))
        opts = sorted(covers_elem[pivot], key=lambda x: (-(masks[x] & unc).bit_count(), x))
        for x in opts:
            chosen.append(x)
            search(covered | masks[x], chosen)
            chosen.pop()

    search(0, [])
    return set(best[1])


def instance_from_sets(sets: dict[int, set[Pair]], ground: set[Pair] | None = None,
                       mode: Mode = Mode.GATE, param: int = 2) -> CoverInstance:
    """Wrap an arbitrary pair-set family as a :class:`CoverInstance` (mostly for testing)."""
    if ground is None:
        ground = set().union(*sets.values()) if sets else set()
    n = 1 + max([max(sets, default=-1)] + [b for _, b in ground])
    return CoverInstance(mode, param, n, set(ground), {x: set(s) for x, s in sets.items() if s})
