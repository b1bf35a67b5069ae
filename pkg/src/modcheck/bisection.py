"""
Balanced minimum-cut bisection of weighted graphs.

Small graphs (up to :data:`EXACT_LIMIT` vertices) are bisected by exhaustive
enumeration, larger ones by iterative improvement from several seeded
starting partitions: Kernighan-Lin pair swaps for exactly balanced cuts,
Fiduccia-Mattheyses single moves when the sides may differ in size.

``min_fraction`` bounds the smaller side to at least ``ceil(min_fraction * n)``
vertices; the default 0.5 means sides of ``n // 2`` and ``n - n // 2``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations

from .graph import CoChangeGraph
from .ingest import ClassId

EXACT_LIMIT = 14
DEFAULT_RESTARTS = 8


@dataclass(frozen=True)
class Bisection:
    left: frozenset[ClassId]
    right: frozenset[ClassId]
    cost: int
    cut_edges: int

    @property
    def mean_cut_weight(self) -> float:
        return self.cost / self.cut_edges if self.cut_edges else 0.0


def cut_of(graph: CoChangeGraph, side: frozenset[ClassId] | set[ClassId]) -> tuple[int, int]:
    """Total weight and number of edges crossing between ``side`` and the rest."""
    cost = n = 0
    for (a, b), w in graph.edges.items():
        if (a in side) != (b in side):
            cost += w
            n += 1
    return cost, n


def _finish(graph: CoChangeGraph, left: set[ClassId]) -> Bisection:
    right = graph.vertices - left
    cost, n = cut_of(graph, left)
    # canonical orientation: the side holding the smallest vertex goes left
    # when sizes allow it
    if len(left) == len(right) and min(right) < min(left):
        left, right = right, frozenset(left)
    return Bisection(frozenset(left), frozenset(right), cost, n)


def smallest_side(n: int, min_fraction: float = 0.5) -> int:
    if not 0 < min_fraction <= 0.5:
        raise ValueError(f"min_fraction must be in (0, 0.5], got {min_fraction}")
    return max(1, min(n // 2, math.ceil(min_fraction * n - 1e-9)))


def _candidates(n: int, lo: int):
    """Index subsets for the smaller side, most balanced sizes first."""
    for size in range(n // 2, lo - 1, -1):
        if 2 * size == n:
            # fix vertex 0 on the left to skip mirrored cuts
            yield from ((0, *rest) for rest in combinations(range(1, n), size - 1))
        else:
            yield from combinations(range(n), size)


def exact_bisection(graph: CoChangeGraph, min_fraction: float = 0.5) -> Bisection:
    verts = sorted(graph.vertices)
    n = len(verts)
    if n < 2:
        return Bisection(frozenset(verts), frozenset(), 0, 0)
    index = {v: i for i, v in enumerate(verts)}
    edges = [(1 << index[a], 1 << index[b], w) for (a, b), w in graph.edges.items()]
    best_cost, best_mask = None, 0
    for combo in _candidates(n, smallest_side(n, min_fraction)):
        mask = 0
        for i in combo:
            mask |= 1 << i
        cost = 0
        for ba, bb, w in edges:
            if bool(mask & ba) != bool(mask & bb):
                cost += w
        if best_cost is None or cost < best_cost:
            best_cost, best_mask = cost, mask
            if cost == 0:
                break
    left = {v for i, v in enumerate(verts) if best_mask >> i & 1}
    return _finish(graph, left)


def _grow(graph: CoChangeGraph, start: ClassId, size: int) -> set[ClassId]:
    """Greedy graph growing: repeatedly absorb the vertex most tied to the region."""
    adj = graph.adjacency
    region = {start}
    pull = dict(adj[start])
    while len(region) < size:
        if pull:
            v = max(pull, key=lambda u: (pull[u], u))
        else:
            v = min(graph.vertices - region)  # disconnected remainder
        region.add(v)
        pull.pop(v, None)
        for u, w in adj[v].items():
            if u not in region:
                pull[u] = pull.get(u, 0) + w
    return region


def kernighan_lin(graph: CoChangeGraph, left: set[ClassId]) -> set[ClassId]:
    """Refine a bisection by Kernighan-Lin pair-swap passes until no pass gains."""
    adj = graph.adjacency
    left = set(left)
    while True:
        right = graph.vertices - left
        d = {}
        for v in graph.vertices:
            own = left if v in left else right
            ext = inner = 0
            for u, w in adj[v].items():
                if u in own:
                    inner += w
                else:
                    ext += w
            d[v] = ext - inner
        free_a, free_b = set(left), set(right)
        swaps: list[tuple[ClassId, ClassId]] = []
        total, best_total, best_k = 0, 0, 0
        for _ in range(min(len(free_a), len(free_b))):
            la = sorted(free_a, key=lambda v: (-d[v], v))
            lb = sorted(free_b, key=lambda v: (-d[v], v))
            pick, gain = None, None
            for a in la:
                if gain is not None and d[a] + d[lb[0]] <= gain:
                    break
                wa = adj[a]
                for b in lb:
                    bound = d[a] + d[b]
                    if gain is not None and bound <= gain:
                        break
                    g = bound - 2 * wa.get(b, 0)
                    if gain is None or g > gain:
                        pick, gain = (a, b), g
            a, b = pick
            free_a.discard(a)
            free_b.discard(b)
            for x in free_a:
                d[x] += 2 * adj[x].get(a, 0) - 2 * adj[x].get(b, 0)
            for y in free_b:
                d[y] += 2 * adj[y].get(b, 0) - 2 * adj[y].get(a, 0)
            swaps.append(pick)
            total += gain
            if total > best_total:
                best_total, best_k = total, len(swaps)
        if best_k == 0:
            return left
        for a, b in swaps[:best_k]:
            left.remove(a)
            left.add(b)


def fiduccia_mattheyses(graph: CoChangeGraph, left: set[ClassId], lo: int) -> set[ClassId]:
    """Refine by single-vertex moves keeping both sides at ``lo`` vertices or more."""
    adj = graph.adjacency
    n = len(graph.vertices)
    hi = n - lo
    left = set(left)
    while True:
        gain = {}
        for v in graph.vertices:
            here = v in left
            gain[v] = sum(w if (u in left) != here else -w for u, w in adj[v].items())
        side = set(left)
        free = set(graph.vertices)
        moves: list[ClassId] = []
        total, best_total, best_k = 0, 0, 0
        while free:
            size = len(side)
            movable = [v for v in free if (size - 1 >= lo if v in side else size + 1 <= hi)]
            if not movable:
                break
            v = max(movable, key=lambda u: (gain[u], u))
            g = gain[v]
            was_left = v in side
            for u, w in adj[v].items():
                if u in free and u != v:
                    gain[u] += 2 * w if (u in side) == was_left else -2 * w
            if was_left:
                side.remove(v)
            else:
                side.add(v)
            free.remove(v)
            moves.append(v)
            total += g
            if total > best_total:
                best_total, best_k = total, len(moves)
        if best_k == 0:
            return left
        for v in moves[:best_k]:
            left.symmetric_difference_update((v,))


def heuristic_bisection(
    graph: CoChangeGraph, seed: int = 0, min_fraction: float = 0.5, restarts: int = DEFAULT_RESTARTS
) -> Bisection:
    verts = sorted(graph.vertices)
    n = len(verts)
    half = n // 2
    lo = smallest_side(n, min_fraction)
    rng = random.Random(seed)
    starts = [set(verts[:half])]
    for i in range(restarts):
        if i % 2 == 0:
            starts.append(_grow(graph, rng.choice(verts), half))
        else:
            starts.append(set(rng.sample(verts, half)))
    best = None
    for start in starts:
        refined = kernighan_lin(graph, start) if lo == half else fiduccia_mattheyses(graph, start, lo)
        cand = _finish(graph, refined)
        better = (cand.cost, -min(len(cand.left), len(cand.right)), sorted(cand.left))
        if best is None or better < best[0]:
            best = (better, cand)
    return best[1]


def min_bisection(graph: CoChangeGraph, seed: int = 0, min_fraction: float = 0.5) -> Bisection:
    if len(graph.vertices) <= EXACT_LIMIT:
        return exact_bisection(graph, min_fraction)
    return heuristic_bisection(graph, seed, min_fraction)
