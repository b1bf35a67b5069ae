"""Analysis report model, distribution-map layout model and canonical JSON output."""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

from .clustering import CoChangeCluster
from .graph import GraphStats
from .ingest import ClassId, FilterReport
from .metrics import ClusterMetrics, MetricsError, PackageStructure, PatternThresholds, summarize

SCHEMA = "cochange-report/1"

# 24 colours, roughly Kelly's maximum-contrast set extended with darker tones
PALETTE = (
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080", "#e6beff",
    "#9a6324", "#fffac8", "#800000", "#aaffc3", "#808000", "#ffd8b1",
    "#000075", "#808080", "#c71585", "#2f4f4f", "#6b8e23", "#ff7f50",
)


@dataclass(frozen=True)
class MapCell:
    fqn: ClassId
    cluster_id: int
    color: int


@dataclass(frozen=True)
class DistributionMapModel:
    packages: tuple[tuple[str, tuple[MapCell, ...]], ...] = ()
    legend: dict[int, str] = field(default_factory=dict)

    @property
    def cell_count(self) -> int:
        return sum(len(cells) for _, cells in self.packages)

    def as_dict(self) -> dict:
        return {
            "packages": [
                {
                    "name": name,
                    "cells": [{"class": c.fqn, "cluster": c.cluster_id, "color": c.color} for c in cells],
                }
                for name, cells in self.packages
            ],
            "legend": {str(k): v for k, v in sorted(self.legend.items())},
        }


def color_index(cluster_id: int) -> int:
    return (cluster_id - 1) % len(PALETTE)


def build_distribution_map(
    clusters: Sequence[CoChangeCluster], structure: PackageStructure, per_cluster: Sequence[ClusterMetrics] = ()
) -> DistributionMapModel:
    owner: dict[ClassId, int] = {}
    for c in clusters:
        for fqn in c.members:
            owner[fqn] = c.cluster_id
            structure.package_of(fqn)  # raises when absent
    ids = {c.cluster_id for c in clusters}
    if per_cluster and {m.cluster_id for m in per_cluster} != ids:
        raise MetricsError("cluster metrics do not match clusters")
    packages = []
    for name, members in structure.packages.items():
        stray = [m for m in members if m not in owner]
        if stray:
            raise MetricsError(f"package {name!r} holds unclustered classes {sorted(stray)}")
        cells = sorted((MapCell(m, owner[m], color_index(owner[m])) for m in members),
                       key=lambda c: (c.cluster_id, c.fqn))
        packages.append((name, tuple(cells)))
    packages.sort(key=lambda p: (-len(p[1]), p[0]))
    return DistributionMapModel(tuple(packages), {i: PALETTE[color_index(i)] for i in sorted(ids)})


@dataclass
class AnalysisReport:
    inputs: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    history: dict = field(default_factory=dict)
    filters: FilterReport = field(default_factory=FilterReport)
    graph_before: GraphStats = GraphStats(0, 0, 0.0)
    graph_after: GraphStats = GraphStats(0, 0, 0.0)
    clustering_passes: list[dict] = field(default_factory=list)
    thresholds: PatternThresholds = PatternThresholds()
    clusters: list[ClusterMetrics] = field(default_factory=list)
    distribution_map: DistributionMapModel = DistributionMapModel()
    status: str = "ok"

    @property
    def cluster_count(self) -> int:
        return len(self.clusters)

    def as_dict(self) -> dict:
        stats = summarize(self.clusters)
        return {
            "schema": SCHEMA,
            "status": self.status,
            "run": {"inputs": self.inputs, "config": self.config, "history": self.history},
            "filters": self.filters.as_dict(),
            "graph": {"before_pruning": self.graph_before.as_dict(), "after_pruning": self.graph_after.as_dict()},
            "clustering_passes": self.clustering_passes,
            "pattern_thresholds": self.thresholds.as_dict(),
            "cluster_count": self.cluster_count,
            "statistics": {k: v.as_dict() for k, v in stats.items()} if stats else None,
            "clusters": [c.as_dict() for c in self.clusters],
            "distribution_map": self.distribution_map.as_dict(),
        }


def _number(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x}")
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _encode(obj, out: list[str], depth: int) -> None:
    pad = "\n" + "  " * (depth + 1)
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_number(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            out.append(("," if i else "") + pad + json.dumps(str(key), ensure_ascii=False) + ": ")
            _encode(obj[key], out, depth + 1)
        out.append("\n" + "  " * depth + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(obj):
            out.append(("," if i else "") + pad)
            _encode(item, out, depth + 1)
        out.append("\n" + "  " * depth + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Indented JSON with sorted keys and reals fixed at six decimals, newline-terminated."""
    out: list[str] = []
    _encode(obj, out, 0)
    return "".join(out) + "\n"


def render_json(report: AnalysisReport) -> str:
    return canonical_json(report.as_dict())
