"""Static HTML distribution map with inline SVG and metric tables."""

from __future__ import annotations

import math
from html import escape

from .report import PALETTE, AnalysisReport, DistributionMapModel, _number
from .metrics import summarize

ROW_CELLS = 8
CELL = 20
GAP = 2
PAD = 6
LABEL = 16
MAP_WIDTH = 960
MARGIN = 12


def _text_color(hex_color: str) -> str:
    r, g, b = (int(hex_color[i : i + 2], 16) for i in (1, 3, 5))
    return "#000000" if 0.299 * r + 0.587 * g + 0.114 * b > 140 else "#ffffff"


def _package_box(n_cells: int) -> tuple[int, int]:
    cols = min(ROW_CELLS, max(n_cells, 1))
    rows = max(1, math.ceil(n_cells / ROW_CELLS))
    return 2 * PAD + cols * CELL + (cols - 1) * GAP, 2 * PAD + rows * CELL + (rows - 1) * GAP


def _svg(model: DistributionMapModel) -> str:
    parts: list[str] = []
    x = y = MARGIN
    line_height = 0
    for name, cells in model.packages:
        w, h = _package_box(len(cells))
        if x > MARGIN and x + w > MAP_WIDTH - MARGIN:
            x, y = MARGIN, y + line_height + LABEL + MARGIN
            line_height = 0
        parts.append('<g class="package-group">')
        parts.append(
            f'<rect class="package" x="{x}" y="{y}" width="{w}" height="{h}" '
            f'fill="#f4f4f4" stroke="#555555" stroke-width="1"/>'
        )
        for i, cell in enumerate(cells):
            cx = x + PAD + (i % ROW_CELLS) * (CELL + GAP)
            cy = y + PAD + (i // ROW_CELLS) * (CELL + GAP)
            fill = PALETTE[cell.color]
            parts.append(
                f'<g class="cell"><title>{escape(cell.fqn)}</title>'
                f'<rect class="class-cell" x="{cx}" y="{cy}" width="{CELL}" height="{CELL}" fill="{fill}"/>'
                f'<text x="{cx + CELL // 2}" y="{cy + CELL // 2 + 4}" text-anchor="middle" '
                f'font-size="10" fill="{_text_color(fill)}">{cell.cluster_id}</text></g>'
            )
        parts.append(
            f'<text class="package-label" x="{x}" y="{y + h + 12}" font-size="11">{escape(name or "(default)")}</text>'
        )
        parts.append("</g>")
        x += w + MARGIN
        line_height = max(line_height, h)
    height = y + line_height + LABEL + MARGIN
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{MAP_WIDTH}" height="{height}" '
        f'viewBox="0 0 {MAP_WIDTH} {height}" font-family="sans-serif">' + "".join(parts) + "</svg>"
    )


def _fmt(v) -> str:
    return _number(v) if isinstance(v, float) else escape(str(v))


def _table(caption: str, header: list[str], rows: list[list]) -> str:
    head = "".join(f"<th>{escape(h)}</th>" for h in header)
    body = "".join("<tr>" + "".join(f"<td>{_fmt(c)}</td>" for c in row) + "</tr>" for row in rows)
    return f"<table><caption>{escape(caption)}</caption><thead><tr>{head}</tr></thead><tbody>{body}</tbody></table>"


def render_html(model: DistributionMapModel, report: AnalysisReport) -> str:
    sections = ["<h1>Co-change clusters over the package structure</h1>"]
    if not model.packages:
        sections.append('<p class="notice">No clusters: nothing to map.</p>')
    else:
        sections.append(_svg(model))
        legend = "".join(
            f'<li><span class="swatch" style="background:{color}"></span>Cluster {cid}</li>'
            for cid, color in sorted(model.legend.items())
        )
        sections.append(f'<ul class="legend">{legend}</ul>')

    f = report.filters
    sections.append(
        _table(
            "Commit filters",
            ["commits in", "no maintenance issue", "no class changes", "multiple issues", "scattered", "change sets"],
            [[f.commits_in, f.no_maintenance_issue, f.no_class_changes, f.multiple_issues, f.scattered, f.change_sets_out]],
        )
    )
    sections.append(
        _table(
            "Co-change graph",
            ["", "vertices", "edges", "density"],
            [
                ["before pruning", report.graph_before.vertex_count, report.graph_before.edge_count, report.graph_before.density],
                ["after pruning", report.graph_after.vertex_count, report.graph_after.edge_count, report.graph_after.density],
            ],
        )
    )
    stats = summarize(report.clusters)
    if stats:
        sections.append(
            _table(
                f"Cluster statistics ({report.cluster_count} clusters)",
                ["metric", "mean", "std dev", "min", "max", "median"],
                [[k, s.mean, s.std_dev, s.min, s.max, s.median] for k, s in stats.items()],
            )
        )
        sections.append(
            _table(
                "Clusters",
                ["cluster", "size", "density", "avg edge weight", "focus", "spread", "pattern"],
                [[c.cluster_id, c.size, c.density, c.avg_edge_weight, c.focus, c.spread, c.pattern.value]
                 for c in report.clusters],
            )
        )
    t = report.thresholds
    sections.append(
        _table(
            "Pattern thresholds",
            ["encapsulation epsilon", "partial focus min", "crosscutting focus max", "crosscutting spread min"],
            [[f"{t.encapsulation_epsilon:g}", t.partial_focus_min, t.crosscutting_focus_max, t.crosscutting_spread_min]],
        )
    )
    style = (
        "body{font-family:sans-serif;margin:1.5em}table{border-collapse:collapse;margin:1em 0}"
        "td,th{border:1px solid #bbb;padding:2px 8px;text-align:right}caption{text-align:left;font-weight:bold}"
        ".legend{list-style:none;padding:0;display:flex;flex-wrap:wrap;gap:12px}"
        ".swatch{display:inline-block;width:12px;height:12px;margin-right:4px;border:1px solid #555}"
    )
    return (
        '<!DOCTYPE html>\n<html xmlns="http://www.w3.org/1999/xhtml" lang="en">'
        '<head><meta charset="utf-8"/><title>Co-change distribution map</title>'
        f"<style>{style}</style></head><body>\n" + "\n".join(sections) + "\n</body></html>\n"
    )
