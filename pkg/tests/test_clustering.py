import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphs import brute_force_balanced_cut, planted_graph, random_graph
from modcheck.clustering import (
    ClusteringConfig,
    CoChangeCluster,
    RetrievalTrace,
    _Scorer,
    agglomerate,
    knn_sparsify,
    merge_score,
    partition_phase,
    relabel,
    relative_closeness,
    relative_interconnectivity,
    retrieve_cochange_clusters,
)
from modcheck.graph import CoChangeGraph


def clique(prefix, n, w):
    names = [f"{prefix}{i}" for i in range(n)]
    return {(a, b): w for a, b in itertools.combinations(names, 2)}, names


def two_cliques(w_in=3, bridge=1, n=4):
    e1, a = clique("a", n, w_in)
    e2, b = clique("b", n, w_in)
    edges = {**e1, **e2, ("a0", "b0"): bridge}
    return CoChangeGraph.from_edges(edges), frozenset(a), frozenset(b)


# -- kNN ---------------------------------------------------------------------


def test_knn_identity_when_k_large():
    g = random_graph(random.Random(1), 12, 0.4)
    max_deg = max(len(n) for n in g.adjacency.values())
    assert knn_sparsify(g, max_deg) == g


def test_knn_star_keeps_all_leaf_edges():
    g = CoChangeGraph.from_edges([("c", f"l{w}", w) for w in (5, 4, 3, 2, 1)])
    assert knn_sparsify(g, 2) == g


def test_knn_drops_edge_unranked_by_both_ends():
    # x-y is the lightest edge for both x and y
    edges = {("x", "a"): 5, ("x", "b"): 5, ("y", "c"): 5, ("y", "d"): 5, ("x", "y"): 1}
    g = CoChangeGraph.from_edges(edges)
    assert ("x", "y") not in knn_sparsify(g, 2).edges
    assert ("x", "y") in knn_sparsify(g, 3).edges


def test_knn_empty():
    assert knn_sparsify(CoChangeGraph(), 3) == CoChangeGraph()
    with pytest.raises(ValueError):
        knn_sparsify(CoChangeGraph(), 0)


# -- partition phase ---------------------------------------------------------


def test_partition_target_one():
    g, a, b = two_cliques()
    (only,) = partition_phase(g, 1)
    assert only.members == g.vertices


def test_partition_two_cliques():
    g, a, b = two_cliques()
    parts = partition_phase(g, 2)
    assert {p.members for p in parts} == {a, b}


def test_partition_components_first():
    pairs = {(f"n{i}a", f"n{i}b"): 1 + i % 3 for i in range(8)}
    g = CoChangeGraph.from_edges(pairs)
    parts = partition_phase(g, 8)
    assert {p.members for p in parts} == {frozenset(e) for e in pairs}


def test_partition_errors_and_limits():
    g, _, _ = two_cliques()
    with pytest.raises(ValueError):
        partition_phase(g, 0)
    assert len(partition_phase(g, 100)) == len(g.vertices)
    assert partition_phase(CoChangeGraph(), 3) == []


@given(st.integers(0, 10_000), st.integers(1, 12))
@settings(max_examples=60, deadline=None)
def test_partition_covers_disjointly(seed, target):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(1, 20), 0.3)
    parts = partition_phase(g, target, seed)
    members = [v for p in parts for v in p.members]
    assert sorted(members) == sorted(g.vertices)
    assert len(parts) == min(target, len(g.vertices))


# -- RI / RC -----------------------------------------------------------------

PAIRS = CoChangeGraph.from_edges({("a", "b"): 4, ("c", "d"): 4, ("a", "c"): 2, ("b", "d"): 2})


def test_ri_examples():
    assert relative_interconnectivity({"a", "b"}, {"c", "d"}, PAIRS) == 1.0
    g = CoChangeGraph.from_edges({("a", "b"): 4, ("c", "d"): 4, ("a", "c"): 2})
    assert relative_interconnectivity({"a", "b"}, {"c", "d"}, g) == 0.5
    g = CoChangeGraph.from_edges({("a", "b"): 4, ("c", "d"): 4})
    assert relative_interconnectivity({"a", "b"}, {"c", "d"}, g) == 0.0


def test_rc_examples():
    g = CoChangeGraph.from_edges({("a", "b"): 2, ("c", "d"): 2, ("a", "c"): 1})
    assert relative_closeness({"a", "b"}, {"c", "d"}, g) == 0.5
    g = CoChangeGraph.from_edges({("a", "b"): 3, ("c", "d"): 3, ("a", "c"): 3, ("b", "d"): 3, ("b", "c"): 3})
    assert relative_closeness({"a", "b"}, {"c", "d"}, g) == 1.0
    g = CoChangeGraph.from_edges({("a", "b"): 2, ("c", "d"): 2})
    assert relative_closeness({"a", "b"}, {"c", "d"}, g) == 0.0


def test_zero_denominators():
    g = CoChangeGraph.from_edges({("a", "b"): 2})
    assert relative_interconnectivity({"a"}, {"b"}, g) == math.inf
    assert relative_closeness({"a"}, {"b"}, g) == math.inf
    lonely = CoChangeGraph(frozenset({"a", "b"}))
    assert relative_interconnectivity({"a"}, {"b"}, lonely) == 0.0


def test_disconnected_cluster_has_zero_internal_connectivity():
    g = CoChangeGraph.from_edges({("a", "b"): 2, ("c", "d"): 2, ("b", "c"): 1})
    assert _Scorer(g).internal(frozenset({"a", "b", "d"})) == (0, 0.0)


def test_overlap_is_rejected():
    with pytest.raises(ValueError):
        relative_interconnectivity({"a", "b"}, {"b", "c"}, PAIRS)
    with pytest.raises(ValueError):
        relative_closeness(set(), {"c"}, PAIRS)


@given(st.integers(0, 10_000))
@settings(max_examples=80, deadline=None)
def test_ri_rc_symmetric_and_nonnegative(seed):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(2, 12), 0.4)
    verts = sorted(g.vertices)
    rng.shuffle(verts)
    k = rng.randint(1, len(verts) - 1)
    c1, c2 = set(verts[:k]), set(verts[k:])
    ri, rc = relative_interconnectivity(c1, c2, g), relative_closeness(c1, c2, g)
    assert ri == relative_interconnectivity(c2, c1, g) and ri >= 0
    assert rc == relative_closeness(c2, c1, g) and rc >= 0
    s = merge_score(c1, c2, g)
    assert s >= 0 and not math.isnan(s)
    linked = any((a in c1) != (b in c1) for a, b in g.edges)
    assert (ri > 0) == linked and (rc > 0) == linked


@pytest.mark.parametrize("seed", range(30))
def test_internal_connectivity_matches_balanced_cut_oracle(seed):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(2, 12), 0.3, connected=True)
    ec, mean = _Scorer(g).internal(g.vertices)
    assert ec == brute_force_balanced_cut(g)
    assert 0 < mean <= max(g.edges.values())


# -- agglomeration -----------------------------------------------------------


def test_agglomerate_single():
    g, a, _ = two_cliques()
    (only,) = agglomerate([a], g, ClusteringConfig())
    assert only.members == a


def test_agglomerate_merges_heavy_bundle():
    e1, a = clique("a", 4, 2)
    e2, b = clique("b", 4, 2)
    bundle = {(x, y): 2 for x, y in zip(a, b)} | {(a[i], b[(i + 1) % 4]): 2 for i in range(4)}
    g = CoChangeGraph.from_edges({**e1, **e2, **bundle})
    assert merge_score(set(a), set(b), g) > ClusteringConfig().merge_threshold
    (merged,) = agglomerate([frozenset(a), frozenset(b)], g, ClusteringConfig())
    assert merged.members == g.vertices


def test_agglomerate_weak_bridge_scores_below_bundle():
    g, a, b = two_cliques(w_in=5, bridge=1)
    weak = merge_score(a, b, g)
    e1, x = clique("a", 4, 5)
    e2, y = clique("b", 4, 5)
    strong_g = CoChangeGraph.from_edges({**e1, **e2, **{(p, q): 5 for p, q in zip(x, y)}})
    strong = merge_score(set(x), set(y), strong_g)
    assert 0 < weak < strong
    # only candidate pair and a zero threshold: it merges
    merged = agglomerate([a, b], g, ClusteringConfig(merge_threshold=0.0))
    assert len(merged) == 1
    # default threshold keeps the cliques apart
    assert {c.members for c in agglomerate([a, b], g, ClusteringConfig())} == {a, b}


def test_agglomerate_prefers_best_pair():
    # halves of one clique merge before the weakly bridged neighbour
    e1, a = clique("a", 6, 4)
    e2, b = clique("b", 4, 4)
    g = CoChangeGraph.from_edges({**e1, **e2, ("a0", "b0"): 1})
    subs = [frozenset(a[:3]), frozenset(a[3:]), frozenset(b)]
    result = agglomerate(subs, g, ClusteringConfig(merge_threshold=0.0))
    assert len(result) == 1
    result = agglomerate(subs, g, ClusteringConfig())
    assert {c.members for c in result} == {frozenset(a), frozenset(b)}


def test_agglomerate_rejects_overlap():
    with pytest.raises(ValueError):
        agglomerate([frozenset({"a0", "a1"}), frozenset({"a1"})], two_cliques()[0], ClusteringConfig())


# -- retrieval ---------------------------------------------------------------


def test_single_clique():
    e, names = clique("k", 5, 3)
    (c,) = retrieve_cochange_clusters(CoChangeGraph.from_edges(e), ClusteringConfig(min_cluster_size=4))
    assert c.cluster_id == 1 and c.members == set(names)


def test_small_clusters_discarded_and_reclustered():
    e1, a = clique("a", 5, 3)
    e2, b = clique("b", 3, 3)
    g = CoChangeGraph.from_edges({**e1, **e2})
    trace = RetrievalTrace()
    (c,) = retrieve_cochange_clusters(g, ClusteringConfig(), trace)
    assert c.members == set(a)
    assert [it["discarded"] for it in trace.iterations] == [1, 0]


def test_everything_discarded():
    e, _ = clique("a", 3, 3)
    assert retrieve_cochange_clusters(CoChangeGraph.from_edges(e)) == []
    assert retrieve_cochange_clusters(CoChangeGraph()) == []


@pytest.mark.parametrize("seed", range(10))
def test_planted_cliques(seed):
    g, labels = planted_graph(seed)
    clusters = retrieve_cochange_clusters(g, ClusteringConfig(seed=seed))
    assert sorted(len(c) for c in clusters) == [8, 8, 8, 8]
    for c in clusters:
        assert len({labels[v] for v in c.members}) == 1


@given(st.integers(0, 10_000), st.integers(2, 5))
@settings(max_examples=40, deadline=None)
def test_retrieval_invariants(seed, min_size):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(0, 24), 0.25)
    cfg = ClusteringConfig(min_cluster_size=min_size, seed=seed)
    clusters = retrieve_cochange_clusters(g, cfg)
    seen = set()
    for c in clusters:
        assert len(c) >= min_size
        assert c.members <= g.vertices
        assert not c.members & seen
        seen |= c.members
    assert [c.cluster_id for c in clusters] == list(range(1, len(clusters) + 1))
    assert clusters == retrieve_cochange_clusters(g, cfg)


def test_relabel_order():
    out = relabel([frozenset({"z1", "z2"}), frozenset({"b", "c", "d"}), frozenset({"a", "y"})])
    assert [(c.cluster_id, c.smallest) for c in out] == [(1, "b"), (2, "a"), (3, "z1")]


def test_config_validation():
    for bad in ({"min_cluster_size": 1}, {"alpha": 0}, {"knn_k": 0}, {"merge_threshold": -1},
                {"initial_partitions": 0}, {"max_iterations": 0}):
        with pytest.raises(ValueError):
            ClusteringConfig(**bad)


def test_auto_partitions():
    cfg = ClusteringConfig()
    assert cfg.partitions_for(32) == 8
    assert cfg.partitions_for(5) == 2
    assert cfg.partitions_for(3) == 1
    assert cfg.partitions_for(1000) == 250
    assert ClusteringConfig(initial_partitions=50).partitions_for(10) == 10


def test_cluster_type():
    c = CoChangeCluster(3, frozenset({"b", "a"}))
    assert len(c) == 2 and c.smallest == "a"
