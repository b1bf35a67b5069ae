"""Distribution-map metrics (touch, focus, spread), cluster statistics and pattern classes."""

from __future__ import annotations

import enum
import statistics
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .clustering import CoChangeCluster
from .graph import CoChangeGraph
from .ingest import ClassId, package_of

Members = frozenset[ClassId] | set[ClassId]


class MetricsError(ValueError):
    pass


class Pattern(str, enum.Enum):
    WELL_ENCAPSULATED = "WellEncapsulated"
    PARTIALLY_ENCAPSULATED = "PartiallyEncapsulated"
    WELL_CONFINED = "WellConfined"
    CROSSCUTTING = "Crosscutting"


@dataclass(frozen=True)
class PatternThresholds:
    encapsulation_epsilon: float = 1e-9
    partial_focus_min: float = 0.9
    crosscutting_focus_max: float = 0.5
    crosscutting_spread_min: int = 4

    def __post_init__(self):
        if not 0 <= self.crosscutting_focus_max < self.partial_focus_min <= 1:
            raise ValueError(
                "thresholds must satisfy 0 <= crosscutting_focus_max < partial_focus_min <= 1"
            )
        if self.encapsulation_epsilon < 0:
            raise ValueError("encapsulation_epsilon must be >= 0")
        if self.crosscutting_spread_min < 1:
            raise ValueError("crosscutting_spread_min must be >= 1")

    def as_dict(self) -> dict:
        return {
            "encapsulation_epsilon": self.encapsulation_epsilon,
            "partial_focus_min": self.partial_focus_min,
            "crosscutting_focus_max": self.crosscutting_focus_max,
            "crosscutting_spread_min": self.crosscutting_spread_min,
        }


@dataclass(frozen=True)
class PackageStructure:
    """Packages restricted to classes that belong to some co-change cluster."""

    packages: Mapping[str, frozenset[ClassId]]

    @classmethod
    def from_clusters(cls, clusters: Iterable[CoChangeCluster | Members]) -> PackageStructure:
        acc: dict[str, set[ClassId]] = defaultdict(set)
        for c in clusters:
            for fqn in getattr(c, "members", c):
                acc[package_of(fqn)].add(fqn)
        return cls({p: frozenset(m) for p, m in sorted(acc.items())})

    def package_of(self, fqn: ClassId) -> str:
        pkg = package_of(fqn)
        if fqn not in self.packages.get(pkg, ()):
            raise MetricsError(f"class {fqn} is not in the package structure")
        return pkg


def _members(q) -> frozenset[ClassId]:
    return q.members if isinstance(q, CoChangeCluster) else frozenset(q)


def touch_cluster_in_package(q, p: Members) -> float:
    """Share of the package's clustered classes that lie in ``q``."""
    if not p:
        return 0.0
    return len(_members(q) & p) / len(p)


def touch_package_in_cluster(p: Members, q) -> float:
    """Share of the cluster's classes that lie in package ``p``."""
    q = _members(q)
    if not q:
        raise MetricsError("cluster is empty")
    return len(p & q) / len(q)


def focus(q, structure: PackageStructure) -> float:
    """Sum over touched packages of both touch ratios' product.

    Summed in exact rationals, so a cluster that dominates every package it
    touches gets exactly 1.0.
    """
    q = _members(q)
    if not q:
        raise MetricsError("cluster is empty")
    touched = {structure.package_of(c) for c in q}
    total = Fraction(0)
    for name in touched:
        p = structure.packages[name]
        shared = len(p & q)
        total += Fraction(shared, len(p)) * Fraction(shared, len(q))
    return float(total)


def spread(q, structure: PackageStructure) -> int:
    q = _members(q)
    if not q:
        raise MetricsError("cluster is empty")
    return len({structure.package_of(c) for c in q})


def cluster_stats(q, graph: CoChangeGraph) -> tuple[int, float, float]:
    """Size, density and mean weight of the edges inside ``q``."""
    q = _members(q)
    missing = q - graph.vertices
    if missing:
        raise MetricsError(f"cluster members not in graph: {sorted(missing)}")
    adj = graph.adjacency
    n_edges = total = 0
    for v in q:
        for u, w in adj[v].items():
            if u in q and v < u:
                n_edges += 1
                total += w
    size = len(q)
    density = 2.0 * n_edges / (size * (size - 1)) if size >= 2 else 0.0
    return size, density, (total / n_edges if n_edges else 0.0)


def classify_pattern(focus_value: float, spread_value: int, thresholds: PatternThresholds = PatternThresholds()) -> Pattern:
    if not 0.0 <= focus_value <= 1.0 + 1e-12:
        raise ValueError(f"focus must be in [0, 1], got {focus_value}")
    if spread_value < 1:
        raise ValueError(f"spread must be >= 1, got {spread_value}")
    if focus_value >= 1.0 - thresholds.encapsulation_epsilon:
        return Pattern.WELL_ENCAPSULATED
    if focus_value >= thresholds.partial_focus_min:
        return Pattern.PARTIALLY_ENCAPSULATED
    if spread_value >= thresholds.crosscutting_spread_min and focus_value <= thresholds.crosscutting_focus_max:
        return Pattern.CROSSCUTTING
    return Pattern.WELL_CONFINED


@dataclass(frozen=True)
class DescriptiveStats:
    mean: float
    std_dev: float
    min: float
    max: float
    median: float

    def as_dict(self) -> dict:
        return {"mean": self.mean, "std_dev": self.std_dev, "min": self.min, "max": self.max, "median": self.median}


def descriptive_stats(values: Sequence[float]) -> DescriptiveStats:
    """Summary with population standard deviation."""
    if not values:
        raise ValueError("descriptive_stats needs at least one value")
    vals = [float(v) for v in values]
    return DescriptiveStats(
        mean=statistics.fmean(vals),
        std_dev=statistics.pstdev(vals),
        min=min(vals),
        max=max(vals),
        median=statistics.median(vals),
    )


@dataclass(frozen=True)
class ClusterMetrics:
    cluster_id: int
    size: int
    density: float
    avg_edge_weight: float
    focus: float
    spread: int
    pattern: Pattern
    members: tuple[ClassId, ...]

    def as_dict(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "size": self.size,
            "density": self.density,
            "avg_edge_weight": self.avg_edge_weight,
            "focus": self.focus,
            "spread": self.spread,
            "pattern": self.pattern.value,
            "members": list(self.members),
        }


def measure_clusters(
    clusters: Sequence[CoChangeCluster],
    graph: CoChangeGraph,
    thresholds: PatternThresholds = PatternThresholds(),
) -> tuple[PackageStructure, list[ClusterMetrics]]:
    structure = PackageStructure.from_clusters(clusters)
    rows = []
    for c in sorted(clusters, key=lambda c: c.cluster_id):
        size, density, avg_w = cluster_stats(c, graph)
        f, s = focus(c, structure), spread(c, structure)
        rows.append(
            ClusterMetrics(c.cluster_id, size, density, avg_w, f, s, classify_pattern(f, s, thresholds), tuple(sorted(c.members)))
        )
    return structure, rows


def summarize(rows: Sequence[ClusterMetrics]) -> dict[str, DescriptiveStats] | None:
    if not rows:
        return None
    return {
        "size": descriptive_stats([r.size for r in rows]),
        "density": descriptive_stats([r.density for r in rows]),
        "avg_edge_weight": descriptive_stats([r.avg_edge_weight for r in rows]),
        "focus": descriptive_stats([r.focus for r in rows]),
        "spread": descriptive_stats([r.spread for r in rows]),
    }
