"""Weighted co-change graph, edge pruning and graph statistics."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

from .ingest import ChangeSet, ClassId

Edge = tuple[ClassId, ClassId]


def edge_key(a: ClassId, b: ClassId) -> Edge:
    if a == b:
        raise ValueError(f"self-loop on {a}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class CoChangeGraph:
    """Undirected graph; edge weights count shared change sets.

    Edges are keyed by the ordered pair ``(a, b)`` with ``a < b``.
    """

    vertices: frozenset[ClassId] = frozenset()
    edges: Mapping[Edge, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        for (a, b), w in self.edges.items():
            if not a < b:
                raise ValueError(f"edge {(a, b)} is not in canonical order")
            if w < 1:
                raise ValueError(f"edge {(a, b)} has weight {w}")
            if a not in self.vertices or b not in self.vertices:
                raise ValueError(f"edge {(a, b)} has an endpoint outside the vertex set")

    @classmethod
    def from_edges(cls, edges: Mapping[tuple[ClassId, ClassId], int] | Iterable[tuple[ClassId, ClassId, int]],
                   vertices: Iterable[ClassId] = ()) -> CoChangeGraph:
        items = edges.items() if isinstance(edges, Mapping) else (((a, b), w) for a, b, w in edges)
        canon: dict[Edge, int] = {}
        for (a, b), w in items:
            k = edge_key(a, b)
            canon[k] = canon.get(k, 0) + w
        verts = set(vertices)
        for a, b in canon:
            verts.update((a, b))
        return cls(frozenset(verts), canon)

    @cached_property
    def adjacency(self) -> dict[ClassId, dict[ClassId, int]]:
        adj: dict[ClassId, dict[ClassId, int]] = {v: {} for v in self.vertices}
        for (a, b), w in self.edges.items():
            adj[a][b] = w
            adj[b][a] = w
        return adj

    def weight(self, a: ClassId, b: ClassId) -> int:
        return self.adjacency.get(a, {}).get(b, 0)

    def subgraph(self, members: Iterable[ClassId]) -> CoChangeGraph:
        keep = frozenset(members) & self.vertices
        return CoChangeGraph(keep, {e: w for e, w in self.edges.items() if e[0] in keep and e[1] in keep})

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class GraphStats:
    vertex_count: int
    edge_count: int
    density: float

    def as_dict(self) -> dict:
        return {"vertices": self.vertex_count, "edges": self.edge_count, "density": self.density}


def build_graph(changesets: Iterable[ChangeSet]) -> CoChangeGraph:
    counts: Counter[Edge] = Counter()
    vertices: set[ClassId] = set()
    for cs in changesets:
        vertices.update(cs.classes)
        counts.update(combinations(sorted(cs.classes), 2))
    return CoChangeGraph(frozenset(vertices), dict(counts))


def prune_edges(graph: CoChangeGraph, min_weight: int = 2) -> CoChangeGraph:
    """Drop edges lighter than ``min_weight`` and the vertices left without edges.

    With ``min_weight == 1`` only isolated vertices go.
    """
    if min_weight < 1:
        raise ValueError(f"min_weight must be >= 1, got {min_weight}")
    kept = {e: w for e, w in graph.edges.items() if w >= min_weight}
    return CoChangeGraph(frozenset(v for e in kept for v in e), kept)


def graph_stats(graph: CoChangeGraph) -> GraphStats:
    n, m = len(graph.vertices), len(graph.edges)
    density = 2.0 * m / (n * (n - 1)) if n >= 2 else 0.0
    return GraphStats(n, m, density)


def format_edge_list(graph: CoChangeGraph) -> str:
    """One ``a<TAB>b<TAB>weight`` line per edge, sorted."""
    return "".join(f"{a}\t{b}\t{w}\n" for (a, b), w in sorted(graph.edges.items()))
