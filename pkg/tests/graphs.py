"""Random graph generators and brute-force oracles shared by the tests."""

import random
from itertools import combinations

from modcheck.graph import CoChangeGraph


def random_graph(rng: random.Random, n: int, p: float, max_w: int = 5, connected: bool = False) -> CoChangeGraph:
    names = [f"v{i:02d}" for i in range(n)]
    edges = {}
    if connected:
        for i in range(1, n):
            j = rng.randrange(i)
            edges[(names[j], names[i])] = rng.randint(1, max_w)
    for a, b in combinations(names, 2):
        if (a, b) not in edges and rng.random() < p:
            edges[(a, b)] = rng.randint(1, max_w)
    return CoChangeGraph.from_edges(edges, names)


def planted_graph(seed: int, clusters: int = 4, size: int = 8, presence: float = 0.9,
                  weights=(3, 5), bridges: int = 3):
    """Cliques with random internal gaps joined by weight-1 bridges; returns graph and labels."""
    rng = random.Random(seed)
    names = [f"p{c}.C{i}" for c in range(clusters) for i in range(size)]
    labels = {v: i // size for i, v in enumerate(names)}
    edges = {}
    for c in range(clusters):
        members = names[c * size : (c + 1) * size]
        for a, b in combinations(members, 2):
            if rng.random() < presence:
                edges[(a, b)] = rng.randint(*weights)
    placed = 0
    while placed < bridges:
        a, b = sorted(rng.sample(names, 2))
        if labels[a] == labels[b] or (a, b) in edges:
            continue
        edges[(a, b)] = 1
        placed += 1
    return CoChangeGraph.from_edges(edges, names), labels


def brute_force_balanced_cut(graph: CoChangeGraph) -> int:
    """Minimum total weight crossing any split into halves of size n//2 and n - n//2."""
    verts = sorted(graph.vertices)
    n = len(verts)
    best = None
    for left in combinations(verts, n // 2):
        side = set(left)
        cost = sum(w for (a, b), w in graph.edges.items() if (a in side) != (b in side))
        best = cost if best is None else min(best, cost)
    return best or 0


def brute_force_min_cut(graph: CoChangeGraph, min_side: int) -> int:
    verts = sorted(graph.vertices)
    best = None
    for k in range(min_side, len(verts) // 2 + 1):
        for left in combinations(verts, k):
            side = set(left)
            cost = sum(w for (a, b), w in graph.edges.items() if (a in side) != (b in side))
            best = cost if best is None else min(best, cost)
    return best or 0
