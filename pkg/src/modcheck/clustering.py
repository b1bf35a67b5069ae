"""
Co-change cluster retrieval with a two-phase Chameleon-style algorithm.

Phase one sparsifies the graph to its k-nearest-neighbour graph and splits it
by recursive min-cut bisection into many small sub-clusters. Phase two merges
sub-clusters greedily by relative interconnectivity (RI) and relative
closeness (RC), scoring a pair as ``RI * RC ** alpha``. Clusters smaller than
the minimum size are discarded and the remaining vertices clustered again.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

from .bisection import min_bisection
from .graph import CoChangeGraph, Edge
from .ingest import ClassId

logger = logging.getLogger(__name__)

#: Smallest side of a phase-one bisection, as a fraction of the part.
PARTITION_BALANCE = 0.25


@dataclass(frozen=True)
class CoChangeCluster:
    cluster_id: int
    members: frozenset[ClassId]

    def __len__(self) -> int:
        return len(self.members)

    @property
    def smallest(self) -> ClassId:
        return min(self.members)


@dataclass
class ClusteringConfig:
    min_cluster_size: int = 4
    knn_k: int = 10
    initial_partitions: int | None = None  # None: derived from graph size
    alpha: float = 2.0
    merge_threshold: float = 0.1
    seed: int = 0
    max_iterations: int = 10

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ValueError(f"min_cluster_size must be >= 2, got {self.min_cluster_size}")
        if self.knn_k < 1:
            raise ValueError(f"knn_k must be >= 1, got {self.knn_k}")
        if self.initial_partitions is not None and self.initial_partitions < 1:
            raise ValueError(f"initial_partitions must be >= 1, got {self.initial_partitions}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.merge_threshold < 0:
            raise ValueError(f"merge_threshold must be >= 0, got {self.merge_threshold}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")

    def partitions_for(self, n_vertices: int) -> int:
        if self.initial_partitions is not None:
            return max(1, min(self.initial_partitions, n_vertices))
        auto = max(2, math.ceil(n_vertices / self.min_cluster_size))
        return max(1, min(auto, n_vertices // 2))


def knn_sparsify(graph: CoChangeGraph, k: int) -> CoChangeGraph:
    """Keep an edge when either endpoint ranks the other among its k heaviest neighbours.

    Ties in weight are broken by neighbour name.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    keep: set[Edge] = set()
    for v, nbrs in graph.adjacency.items():
        ranked = sorted(nbrs.items(), key=lambda item: (-item[1], item[0]))[:k]
        for u, _ in ranked:
            keep.add((v, u) if v < u else (u, v))
    return CoChangeGraph(graph.vertices, {e: w for e, w in graph.edges.items() if e in keep})


# -- phase one ---------------------------------------------------------------


def _components(graph: CoChangeGraph) -> list[frozenset[ClassId]]:
    adj = graph.adjacency
    seen: set[ClassId] = set()
    comps = []
    for root in sorted(graph.vertices):
        if root in seen:
            continue
        stack, comp = [root], {root}
        while stack:
            for u in adj[stack.pop()]:
                if u not in comp:
                    comp.add(u)
                    stack.append(u)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def _split(graph: CoChangeGraph, seed: int) -> tuple[frozenset[ClassId], frozenset[ClassId]]:
    comps = _components(graph)
    if len(comps) > 1:
        # zero-cost cut: deal components to the lighter side, largest first
        sides: list[set[ClassId]] = [set(), set()]
        for comp in sorted(comps, key=lambda c: (-len(c), min(c))):
            sides[0 if len(sides[0]) <= len(sides[1]) else 1] |= comp
        return frozenset(sides[0]), frozenset(sides[1])
    cut = min_bisection(graph, seed, PARTITION_BALANCE)
    return cut.left, cut.right


def _internal_weight(graph: CoChangeGraph, members: frozenset[ClassId]) -> int:
    return sum(w for (a, b), w in graph.edges.items() if a in members and b in members)


def partition_phase(graph: CoChangeGraph, target_count: int, seed: int = 0) -> list[CoChangeCluster]:
    """Recursively bisect the largest part until ``target_count`` parts exist.

    Parts are split by zero-cost cuts between components when disconnected,
    otherwise by a min-cut bisection whose smaller side holds at least
    :data:`PARTITION_BALANCE` of the part. Singletons are never split.
    """
    if target_count < 1:
        raise ValueError(f"target_count must be >= 1, got {target_count}")
    if not graph.vertices:
        return []
    parts = [frozenset(graph.vertices)]
    while len(parts) < target_count:
        divisible = [p for p in parts if len(p) >= 2]
        if not divisible:
            break
        part = min(divisible, key=lambda p: (-len(p), -_internal_weight(graph, p), min(p)))
        parts.remove(part)
        parts.extend(_split(graph.subgraph(part), seed))
    parts.sort(key=lambda p: min(p))
    return [CoChangeCluster(i, p) for i, p in enumerate(parts)]


# -- phase two ---------------------------------------------------------------


class _Scorer:
    """Chameleon similarity terms over one graph, with cached bisections."""

    def __init__(self, graph: CoChangeGraph, seed: int = 0):
        self.graph = graph
        self.seed = seed
        self._internal = lru_cache(maxsize=None)(self._compute_internal)

    def _compute_internal(self, members: frozenset[ClassId]) -> tuple[int, float]:
        if len(members) < 2:
            return 0, 0.0
        sub = self.graph.subgraph(members)
        if len(_components(sub)) > 1:
            return 0, 0.0
        cut = min_bisection(sub, self.seed)
        return cut.cost, cut.mean_cut_weight

    def internal(self, members: frozenset[ClassId]) -> tuple[int, float]:
        """Min-cut bisection weight and mean cut-edge weight; zero when undefined."""
        return self._internal(frozenset(members))

    def between(self, c1: frozenset[ClassId], c2: frozenset[ClassId]) -> tuple[int, int]:
        adj = self.graph.adjacency
        small, large = (c1, c2) if len(c1) <= len(c2) else (c2, c1)
        total = n = 0
        for v in small:
            for u, w in adj.get(v, {}).items():
                if u in large:
                    total += w
                    n += 1
        return total, n

    def ri(self, c1, c2) -> float:
        _check_disjoint(c1, c2)
        ec12, _ = self.between(c1, c2)
        if ec12 == 0:
            return 0.0
        denom = (self.internal(c1)[0] + self.internal(c2)[0]) / 2
        return ec12 / denom if denom > 0 else math.inf

    def rc(self, c1, c2) -> float:
        _check_disjoint(c1, c2)
        ec12, n12 = self.between(c1, c2)
        if ec12 == 0:
            return 0.0
        size = len(c1) + len(c2)
        denom = len(c1) / size * self.internal(c1)[1] + len(c2) / size * self.internal(c2)[1]
        return (ec12 / n12) / denom if denom > 0 else math.inf

    def score(self, c1, c2, alpha: float) -> float:
        ri = self.ri(c1, c2)
        if ri == 0:
            return 0.0
        return ri * self.rc(c1, c2) ** alpha


def _check_disjoint(c1: Iterable[ClassId], c2: Iterable[ClassId]) -> None:
    s1, s2 = set(c1), set(c2)
    if not s1 or not s2:
        raise ValueError("clusters must be non-empty")
    if s1 & s2:
        raise ValueError(f"clusters overlap on {sorted(s1 & s2)}")


def _members(c) -> frozenset[ClassId]:
    return c.members if isinstance(c, CoChangeCluster) else frozenset(c)


def relative_interconnectivity(c1, c2, graph: CoChangeGraph, seed: int = 0) -> float:
    return _Scorer(graph, seed).ri(_members(c1), _members(c2))


def relative_closeness(c1, c2, graph: CoChangeGraph, seed: int = 0) -> float:
    return _Scorer(graph, seed).rc(_members(c1), _members(c2))


def merge_score(c1, c2, graph: CoChangeGraph, alpha: float = 2.0, seed: int = 0) -> float:
    return _Scorer(graph, seed).score(_members(c1), _members(c2), alpha)


def agglomerate(
    subclusters: Sequence[CoChangeCluster | frozenset[ClassId]],
    graph: CoChangeGraph,
    config: ClusteringConfig,
    scorer: _Scorer | None = None,
) -> list[CoChangeCluster]:
    """Greedily merge the best-scoring pair while its score exceeds the threshold.

    Equal scores prefer the smaller merged cluster, then the one holding the
    lexicographically smallest class.
    """
    scorer = scorer or _Scorer(graph, config.seed)
    clusters = [_members(c) for c in subclusters]
    for i, a in enumerate(clusters):
        for b in clusters[i + 1 :]:
            _check_disjoint(a, b)
    scores: dict[frozenset[frozenset[ClassId]], float] = {}

    def pair_score(a, b):
        key = frozenset((a, b))
        if key not in scores:
            scores[key] = scorer.score(a, b, config.alpha)
        return scores[key]

    alive = set(clusters)
    while len(alive) > 1:
        best, best_key = None, None
        adj = graph.adjacency
        owner = {v: c for c in alive for v in c}
        for a in alive:
            touching = {owner[u] for v in a for u in adj.get(v, {}) if u in owner} - {a}
            for b in touching:
                s = pair_score(a, b)
                if s <= config.merge_threshold:
                    continue
                key = (-s, len(a) + len(b), min(a | b), min(min(a), min(b)), max(min(a), min(b)))
                if best_key is None or key < best_key:
                    best, best_key = (a, b), key
        if best is None:
            break
        a, b = best
        alive -= {a, b}
        alive.add(a | b)
        logger.debug("merge %s + %s (score %.4g)", min(a), min(b), -best_key[0])
    ordered = sorted(alive, key=lambda c: min(c))
    return [CoChangeCluster(i, c) for i, c in enumerate(ordered)]


def _cluster_once(graph: CoChangeGraph, config: ClusteringConfig) -> list[CoChangeCluster]:
    sparse = knn_sparsify(graph, config.knn_k)
    parts = partition_phase(sparse, config.partitions_for(len(sparse.vertices)), config.seed)
    return agglomerate(parts, sparse, config)


def relabel(clusters: Iterable[frozenset[ClassId]]) -> list[CoChangeCluster]:
    """Number clusters from 1 by decreasing size, then smallest member."""
    ordered = sorted(clusters, key=lambda c: (-len(c), min(c)))
    return [CoChangeCluster(i, frozenset(c)) for i, c in enumerate(ordered, start=1)]


@dataclass
class RetrievalTrace:
    """Per-iteration cluster and discard counts of a retrieval run."""

    iterations: list[dict] = field(default_factory=list)


def retrieve_cochange_clusters(
    graph: CoChangeGraph, config: ClusteringConfig | None = None, trace: RetrievalTrace | None = None
) -> list[CoChangeCluster]:
    config = config or ClusteringConfig()
    current = graph
    kept: list[frozenset[ClassId]] = []
    for it in range(config.max_iterations):
        if not current.vertices:
            kept = []
            break
        found = _cluster_once(current, config)
        kept = [c.members for c in found if len(c) >= config.min_cluster_size]
        dropped = len(found) - len(kept)
        if trace is not None:
            trace.iterations.append(
                {"iteration": it + 1, "vertices": len(current.vertices), "clusters": len(found), "discarded": dropped}
            )
        logger.info(
            "clustering pass %d: %d vertices, %d clusters, %d discarded",
            it + 1, len(current.vertices), len(found), dropped,
        )
        if not dropped:
            break
        current = current.subgraph(frozenset().union(*kept))
    return relabel(kept)
