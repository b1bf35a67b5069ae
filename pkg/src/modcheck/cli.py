"""
Command-line pipeline: ingest, filter, build and prune the graph, cluster,
measure and render.

Exit codes: 0 success, 2 usage, 3 input parse, 4 no change sets survive the
filters, 5 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .clustering import ClusteringConfig, RetrievalTrace, retrieve_cochange_clusters
from .graph import build_graph, format_edge_list, graph_stats, prune_edges
from .html import render_html
from .ingest import (
    DEFAULT_ISSUE_PATTERN,
    IngestConfig,
    IssueParseError,
    LogParseError,
    filter_commits,
    parse_issue_reports,
    parse_vcs_log,
)
from .metrics import PatternThresholds, measure_clusters
from .report import AnalysisReport, build_distribution_map, render_json

logger = logging.getLogger("modcheck")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_EMPTY, EXIT_INTERNAL = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


class PipelineError(Exception):
    def __init__(self, stage: str, message: str, code: int):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.code = code


@dataclass
class AnalysisConfig:
    repo_log: Path
    issues: list[Path]
    vcs: str = "git"
    ingest: IngestConfig = field(default_factory=IngestConfig)
    min_edge_weight: int = 2
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    thresholds: PatternThresholds = field(default_factory=PatternThresholds)
    out_json: Path | None = None
    out_html: Path | None = None
    dump_graph: Path | None = None
    verbosity: int = 0
    echo: dict = field(default_factory=dict)


# -- option parsing ----------------------------------------------------------


def _positive_int(minimum: int):
    def conv(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise UsageError(f"expected an integer, got {text!r}") from None
        if value < minimum:
            raise UsageError(f"value must be >= {minimum}, got {value}")
        return value

    return conv


def _real(minimum: float, strict: bool = False):
    def conv(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise UsageError(f"expected a number, got {text!r}") from None
        if value < minimum or (strict and value == minimum):
            raise UsageError(f"value must be {'>' if strict else '>='} {minimum}, got {value}")
        return value

    return conv


def _partitions(text: str) -> int | None:
    return None if text == "auto" else _positive_int(1)(text)


def _vcs(text: str) -> str:
    if text not in ("git", "svn"):
        raise UsageError(f"--vcs must be git or svn, got {text!r}")
    return text


def _csv(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


_THRESHOLD_KEYS = {
    "focus_min": ("partial_focus_min", float),
    "cc_focus": ("crosscutting_focus_max", float),
    "cc_spread": ("crosscutting_spread_min", int),
    "epsilon": ("encapsulation_epsilon", float),
}


def _thresholds(text: str) -> PatternThresholds:
    kwargs = {}
    for item in _csv(text):
        key, sep, value = item.partition("=")
        if not sep or key.strip() not in _THRESHOLD_KEYS:
            raise UsageError(f"bad pattern threshold {item!r}; keys: {', '.join(_THRESHOLD_KEYS)}")
        name, conv = _THRESHOLD_KEYS[key.strip()]
        try:
            kwargs[name] = conv(value)
        except ValueError:
            raise UsageError(f"bad value in pattern threshold {item!r}") from None
    try:
        return PatternThresholds(**kwargs)
    except ValueError as err:
        raise UsageError(str(err)) from None


# name -> (converter for one token, default token(s), multi-valued)
OPTIONS: dict[str, tuple] = {
    "repo-log": (str, None, False),
    "vcs": (_vcs, "git", False),
    "issues": (str, None, True),
    "issue-pattern": (str, DEFAULT_ISSUE_PATTERN, False),
    "issue-types": (str, "Bug,Improvement,Task", False),
    "max-scatter": (_positive_int(1), "10", False),
    "source-root": (str, [""], True),
    "class-suffix": (str, ".java", False),
    "min-edge-weight": (_positive_int(1), "2", False),
    "dump-graph": (str, None, False),
    "min-cluster-size": (_positive_int(2), "4", False),
    "knn": (_positive_int(1), "10", False),
    "alpha": (_real(0.0, strict=True), "2.0", False),
    "partitions": (_partitions, "auto", False),
    "merge-threshold": (_real(0.0), "0.1", False),
    "seed": (int, "0", False),
    "max-recluster-iterations": (_positive_int(1), "10", False),
    "pattern-thresholds": (_thresholds, "focus_min=0.9,cc_focus=0.5,cc_spread=4,epsilon=1e-9", False),
    "out-json": (str, None, False),
    "out-html": (str, None, False),
}
# options that only route output; kept out of the report's config echo
_NOT_ECHOED = {"repo-log", "issues", "dump-graph", "out-json", "out-html"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modcheck", description="Assess package modularity with co-change clusters.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", metavar="PATH", help="key=value file; flags override it")
    p.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    helps = {
        "repo-log": "exported version-control log",
        "vcs": "log format: git or svn (default git)",
        "issues": "issue report XML files",
        "issue-pattern": "regular expression matching issue keys in commit messages",
        "issue-types": "comma-separated maintenance issue types",
        "max-scatter": "maximum packages a commit may touch (default 10)",
        "source-root": "path prefixes stripped before mapping files to classes",
        "class-suffix": "class file suffix (default .java)",
        "min-edge-weight": "drop edges lighter than this (default 2)",
        "dump-graph": "write the pruned graph as a tab-separated edge list",
        "min-cluster-size": "discard clusters with fewer classes (default 4)",
        "knn": "neighbours kept per vertex before partitioning (default 10)",
        "alpha": "exponent of relative closeness in the merge score (default 2.0)",
        "partitions": "number of phase-one sub-clusters, or auto",
        "merge-threshold": "merge only pairs scoring above this (default 0.1)",
        "seed": "seed for randomized bisection starts (default 0)",
        "max-recluster-iterations": "cap on discard-and-recluster passes (default 10)",
        "pattern-thresholds": "e.g. focus_min=0.9,cc_focus=0.5,cc_spread=4",
        "out-json": "JSON report path",
        "out-html": "HTML distribution map path",
    }
    for name, (_, _, multi) in OPTIONS.items():
        p.add_argument(f"--{name}", nargs="+" if multi else None, default=None, help=helps[name])
    return p


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read config file {path}: {err.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        if key not in OPTIONS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def parse_config(argv: list[str] | None = None, config_file: str | Path | None = None) -> AnalysisConfig:
    args = build_parser().parse_args(argv)
    file_values = read_config_file(args.config or config_file) if (args.config or config_file) else {}
    raw: dict[str, object] = {}
    for name, (_, default, multi) in OPTIONS.items():
        flag = getattr(args, name.replace("-", "_"))
        if flag is not None:
            raw[name] = flag
        elif name in file_values:
            raw[name] = file_values[name].split() if multi else file_values[name]
        else:
            raw[name] = default
    if raw["repo-log"] is None:
        raise UsageError("--repo-log is required")
    if not raw["issues"]:
        raise UsageError("--issues is required")

    def get(name):
        conv, _, multi = OPTIONS[name]
        value = raw[name]
        try:
            return [conv(v) for v in value] if multi else conv(value)
        except UsageError as err:
            raise UsageError(f"--{name}: {err}") from None

    try:
        ingest = IngestConfig(
            issue_key_pattern=get("issue-pattern"),
            accepted_issue_types=frozenset(_csv(get("issue-types"))),
            max_scattering=get("max-scatter"),
            source_roots=tuple(get("source-root")),
            class_file_suffix=get("class-suffix"),
        )
        clustering = ClusteringConfig(
            min_cluster_size=get("min-cluster-size"),
            knn_k=get("knn"),
            initial_partitions=get("partitions"),
            alpha=get("alpha"),
            merge_threshold=get("merge-threshold"),
            seed=get("seed"),
            max_iterations=get("max-recluster-iterations"),
        )
    except UsageError:
        raise
    except Exception as err:  # re.error, ValueError from config invariants
        raise UsageError(str(err)) from None
    echo = {k: v for k, v in raw.items() if k not in _NOT_ECHOED}
    out = lambda name: Path(raw[name]) if raw[name] else None  # noqa: E731
    return AnalysisConfig(
        repo_log=Path(raw["repo-log"]),
        issues=[Path(p) for p in get("issues")],
        vcs=get("vcs"),
        ingest=ingest,
        min_edge_weight=get("min-edge-weight"),
        clustering=clustering,
        thresholds=get("pattern-thresholds"),
        out_json=out("out-json"),
        out_html=out("out-html"),
        dump_graph=out("dump-graph"),
        verbosity=args.verbose,
        echo=echo,
    )


# -- pipeline ----------------------------------------------------------------


def _read(path: Path, stage: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as err:
        raise PipelineError(stage, f"cannot read {path}: {err.strerror}", EXIT_INPUT) from None


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def analyze(config: AnalysisConfig) -> tuple[AnalysisReport, dict[str, str]]:
    """Run every stage; return the report and the rendered documents by kind."""
    log_text = _read(config.repo_log, "ingest")
    issue_texts = [_read(p, "ingest") for p in config.issues]
    try:
        commits = parse_vcs_log(log_text, config.vcs)
    except LogParseError as err:
        raise PipelineError("ingest", f"{config.repo_log}: {err}", EXIT_INPUT) from None
    try:
        issues = parse_issue_reports(issue_texts, [str(p) for p in config.issues])
    except IssueParseError as err:
        raise PipelineError("ingest", str(err), EXIT_INPUT) from None

    filtered = filter_commits(commits, issues, config.ingest)
    report = AnalysisReport(
        inputs={
            "repo_log": {"name": config.repo_log.name, "sha256": _digest(log_text), "format": config.vcs},
            "issues": [{"name": p.name, "sha256": _digest(t)} for p, t in zip(config.issues, issue_texts)],
        },
        config=config.echo,
        history={
            "commits": len(commits),
            "issues": len(issues),
            "first_commit": commits[0].timestamp.isoformat() if commits else None,
            "last_commit": commits[-1].timestamp.isoformat() if commits else None,
        },
        filters=filtered.report,
        thresholds=config.thresholds,
    )
    docs: dict[str, str] = {}
    if not filtered.change_sets:
        report.status = "empty"
        docs["json"] = render_json(report)
        docs["html"] = render_html(report.distribution_map, report)
        return report, docs

    graph = build_graph(filtered.change_sets)
    pruned = prune_edges(graph, config.min_edge_weight)
    report.graph_before, report.graph_after = graph_stats(graph), graph_stats(pruned)
    if config.dump_graph:
        docs["graph"] = format_edge_list(pruned)
    trace = RetrievalTrace()
    clusters = retrieve_cochange_clusters(pruned, config.clustering, trace)
    report.clustering_passes = trace.iterations
    structure, rows = measure_clusters(clusters, pruned, config.thresholds)
    report.clusters = rows
    report.distribution_map = build_distribution_map(clusters, structure, rows)
    docs["json"] = render_json(report)
    docs["html"] = render_html(report.distribution_map, report)
    return report, docs


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_pipeline(config: AnalysisConfig) -> AnalysisReport:
    report, docs = analyze(config)
    targets = {"json": config.out_json, "html": config.out_html, "graph": config.dump_graph}
    for kind, path in targets.items():
        if path is not None and kind in docs:
            _atomic_write(path, docs[kind])
            logger.info("wrote %s", path)
    return report


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except UsageError as err:
        print(f"modcheck: usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(config.verbosity, 2)],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        report = run_pipeline(config)
    except PipelineError as err:
        print(f"modcheck: {err}", file=sys.stderr)
        return err.code
    except Exception as err:  # pragma: no cover - last-resort guard
        logger.exception("internal error")
        print(f"modcheck: [internal] {err}", file=sys.stderr)
        return EXIT_INTERNAL
    if report.status == "empty":
        print("modcheck: no commit survived the filters; wrote an empty report", file=sys.stderr)
        return EXIT_EMPTY
    if config.out_json is None:
        sys.stdout.write(render_json(report))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
