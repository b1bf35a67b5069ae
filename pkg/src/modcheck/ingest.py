"""
History ingestion: version-control logs, issue archives and commit filtering.

Commits are read from exported logs (``git log`` with :data:`GIT_LOG_FORMAT`,
or ``svn log --verbose --xml``), linked to issue reports by a textual key
pattern, mapped from file paths to class names, and reduced to change sets
by four filters:

F1  the commit references at least one known maintenance issue
F2  the commit changes at least one class
F3  the commit references exactly one issue
F4  the commit touches at most ``max_scattering`` packages
"""

from __future__ import annotations

import logging
import re
import subprocess
import xml.etree.ElementTree as ET
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO

logger = logging.getLogger(__name__)

ClassId = str
"""Fully qualified, dot-separated class name."""

#: Format handed to ``git log``; see :func:`export_git_log`.
GIT_LOG_FORMAT = "%x1e%H%x1f%aI%x1f%an%x1f%B%x1f"
GIT_LOG_ARGS = ("log", "-z", "--name-status", "--no-renames", f"--format={GIT_LOG_FORMAT}")

DEFAULT_ISSUE_PATTERN = r"\b[A-Z][A-Z0-9]*-\d+\b"
DEFAULT_ISSUE_TYPES = frozenset({"Bug", "Improvement", "Task"})
DEFAULT_MAX_SCATTERING = 10


class LogParseError(ValueError):
    """Malformed version-control log."""

    def __init__(self, message: str, offset: int, parsed: int):
        super().__init__(f"{message} (byte offset {offset}, {parsed} commits parsed)")
        self.offset = offset
        self.parsed = parsed


class IssueParseError(ValueError):
    """Issue archive that violates the ``<issues><issue .../></issues>`` schema."""


@dataclass(frozen=True)
class CommitRecord:
    id: str
    timestamp: datetime
    author: str
    message: str
    changed_paths: frozenset[str]

    def __post_init__(self):
        if not self.id:
            raise ValueError("commit id must be non-empty")


@dataclass(frozen=True)
class IssueRecord:
    key: str
    issue_type: str
    status: str = ""


@dataclass(frozen=True)
class ChangeSet:
    commit_id: str
    issue_key: str
    classes: frozenset[ClassId]

    @property
    def packages_touched(self) -> int:
        return len({package_of(c) for c in self.classes})


@dataclass
class IngestConfig:
    issue_key_pattern: str = DEFAULT_ISSUE_PATTERN
    accepted_issue_types: frozenset[str] = DEFAULT_ISSUE_TYPES
    max_scattering: int = DEFAULT_MAX_SCATTERING
    source_roots: tuple[str, ...] = ("",)
    class_file_suffix: str = ".java"

    def __post_init__(self):
        if self.max_scattering < 1:
            raise ValueError(f"max_scattering must be >= 1, got {self.max_scattering}")
        self.accepted_issue_types = frozenset(self.accepted_issue_types)
        self.source_roots = tuple(self.source_roots) or ("",)
        re.compile(self.issue_key_pattern)

    @property
    def regex(self) -> re.Pattern[str]:
        return re.compile(self.issue_key_pattern)


@dataclass
class FilterReport:
    """Commits removed by each filter, attributed in the order F1..F4."""

    commits_in: int = 0
    no_maintenance_issue: int = 0
    no_class_changes: int = 0
    multiple_issues: int = 0
    scattered: int = 0
    change_sets_out: int = 0

    @property
    def removed(self) -> int:
        return self.no_maintenance_issue + self.no_class_changes + self.multiple_issues + self.scattered

    def as_dict(self) -> dict[str, int]:
        return {
            "commits_in": self.commits_in,
            "removed": {
                "no_maintenance_issue": self.no_maintenance_issue,
                "no_class_changes": self.no_class_changes,
                "multiple_issues": self.multiple_issues,
                "scattered": self.scattered,
            },
            "change_sets_out": self.change_sets_out,
        }


def package_of(fqn: ClassId) -> str:
    """Package part of a class name; ``""`` for the default package."""
    head, _, _ = fqn.rpartition(".")
    return head


def check_class_id(fqn: str) -> ClassId:
    if not fqn or any(not seg for seg in fqn.split(".")):
        raise ValueError(f"invalid class name {fqn!r}")
    return fqn


def _parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _chronological(records: list[CommitRecord]) -> list[CommitRecord]:
    return sorted(records, key=lambda r: r.timestamp)


# -- git ---------------------------------------------------------------------


def parse_git_log(text: str) -> list[CommitRecord]:
    """Parse output of ``git log`` run with :data:`GIT_LOG_ARGS`.

    ``git log`` lists newest first; the result is oldest first, with
    same-instant commits keeping their parent-before-child order.
    """
    records: list[CommitRecord] = []
    if not text.strip("\x00\n\r "):
        return records
    start = text.find("\x1e")
    if start < 0 or text[:start].strip("\x00\n\r "):
        raise LogParseError("expected record separator \\x1e", 0, 0)
    offset = len(text[:start].encode("utf-8"))
    for chunk in text[start + 1 :].split("\x1e"):
        fields = chunk.split("\x1f", 4)
        if len(fields) != 5:
            raise LogParseError("record has too few fields", offset, len(records))
        commit_id, date, author, message, tail = fields
        commit_id = commit_id.strip()
        if not commit_id:
            raise LogParseError("empty commit hash", offset, len(records))
        try:
            timestamp = _parse_timestamp(date)
        except ValueError:
            raise LogParseError(f"bad date {date!r}", offset, len(records)) from None
        tokens = [t.strip("\n") for t in tail.split("\x00")]
        tokens = [t for t in tokens if t]
        paths: set[str] = set()
        i = 0
        while i < len(tokens):
            status = tokens[i]
            if not status[:1].isalpha():
                raise LogParseError(f"bad name-status entry {status!r}", offset, len(records))
            # renames and copies carry source and destination
            n_paths = 2 if status[0] in "RC" else 1
            names = tokens[i + 1 : i + 1 + n_paths]
            if len(names) != n_paths:
                raise LogParseError("truncated name-status list", offset, len(records))
            paths.update(names)
            i += 1 + n_paths
        records.append(CommitRecord(commit_id, timestamp, author, message.strip(), frozenset(paths)))
        offset += len(chunk.encode("utf-8")) + 1
    records.reverse()
    return _chronological(records)


def export_git_log(repo: str | Path, *extra_args: str) -> str:
    """Run ``git log`` in ``repo`` with the format :func:`parse_git_log` reads."""
    out = subprocess.run(
        ["git", "-C", str(repo), *GIT_LOG_ARGS, *extra_args],
        check=True,
        capture_output=True,
    )
    return out.stdout.decode("utf-8", errors="replace")


# -- svn ---------------------------------------------------------------------


def _xml_offset(text: str, err: ET.ParseError) -> int:
    line, col = err.position
    lines = text.splitlines(keepends=True)
    prefix = "".join(lines[: line - 1]) + (lines[line - 1][:col] if line - 1 < len(lines) else "")
    return len(prefix.encode("utf-8"))


def parse_svn_log(text: str) -> list[CommitRecord]:
    """Parse ``svn log --verbose --xml`` output."""
    if not text.strip():
        return []
    try:
        root = ET.fromstring(text)
    except ET.ParseError as err:
        # count complete entries before the failure point
        offset = _xml_offset(text, err)
        parsed = text.encode("utf-8")[:offset].count(b"</logentry>")
        raise LogParseError(f"malformed svn xml: {err}", offset, parsed) from None
    if root.tag != "log":
        raise LogParseError(f"expected <log> root, got <{root.tag}>", 0, 0)
    records = []
    for entry in root.iter("logentry"):
        rev = entry.get("revision", "").strip()
        if not rev:
            raise LogParseError("logentry without revision", 0, len(records))
        date = entry.findtext("date", "")
        try:
            timestamp = _parse_timestamp(date)
        except ValueError:
            raise LogParseError(f"bad date {date!r} in r{rev}", 0, len(records)) from None
        paths = frozenset(
            (p.text or "").strip() for p in entry.iterfind("paths/path") if p.get("kind", "file") != "dir"
        ) - {""}
        records.append(
            CommitRecord(rev, timestamp, entry.findtext("author", ""), entry.findtext("msg", "").strip(), paths)
        )
    return _chronological(records)


def parse_vcs_log(stream: IO[str] | str, format: str) -> list[CommitRecord]:
    text = stream if isinstance(stream, str) else stream.read()
    if format == "git":
        records = parse_git_log(text)
    elif format == "svn":
        records = parse_svn_log(text)
    else:
        raise ValueError(f"unknown log format {format!r}")
    seen: set[str] = set()
    for r in records:
        if r.id in seen:
            raise LogParseError(f"duplicate commit id {r.id}", 0, len(records))
        seen.add(r.id)
    logger.info("parsed %d commits from %s log", len(records), format)
    return records


# -- issues ------------------------------------------------------------------


def parse_issue_reports(documents: Sequence[str], names: Sequence[str] | None = None) -> list[IssueRecord]:
    """Read ``<issues><issue key=".." type=".." status=".."/>...</issues>`` documents.

    ``names`` label the documents in error messages (defaults to their index).
    """
    names = list(names) if names is not None else [f"document[{i}]" for i in range(len(documents))]
    issues: dict[str, IssueRecord] = {}
    for name, doc in zip(names, documents):
        try:
            root = ET.fromstring(doc)
        except ET.ParseError as err:
            raise IssueParseError(f"{name}: not well-formed xml: {err}") from None
        if root.tag != "issues":
            raise IssueParseError(f"{name}: /{root.tag}: expected root element <issues>")
        for i, el in enumerate(root, start=1):
            where = f"{name}: /issues/{el.tag}[{i}]"
            if el.tag != "issue":
                raise IssueParseError(f"{where}: unexpected element")
            key = (el.get("key") or "").strip()
            issue_type = el.get("type")
            if not key:
                raise IssueParseError(f"{where}: missing key attribute")
            if issue_type is None:
                raise IssueParseError(f"{where}: missing type attribute")
            if key in issues:
                raise IssueParseError(f"duplicate issue key {key} ({where})")
            issues[key] = IssueRecord(key, issue_type.strip(), (el.get("status") or "").strip())
    return list(issues.values())


# -- linking and filtering ---------------------------------------------------


def link_commit_to_issues(commit: CommitRecord, config: IngestConfig) -> set[str]:
    return {m.group(0) for m in config.regex.finditer(commit.message)}


def map_paths_to_classes(paths: Iterable[str], config: IngestConfig) -> set[ClassId]:
    suffix = config.class_file_suffix
    classes = set()
    for path in paths:
        path = path.replace("\\", "/")
        if not path.endswith(suffix):
            continue
        for root in config.source_roots:
            if path.startswith(root):
                rel = path[len(root) : len(path) - len(suffix)].strip("/")
                fqn = rel.replace("/", ".")
                if fqn and all(fqn.split(".")):
                    classes.add(fqn)
                break
    return classes


@dataclass
class FilterResult:
    change_sets: list[ChangeSet] = field(default_factory=list)
    report: FilterReport = field(default_factory=FilterReport)


def filter_commits(
    commits: Sequence[CommitRecord], issues: Iterable[IssueRecord], config: IngestConfig
) -> FilterResult:
    by_key = {i.key: i for i in issues}
    result = FilterResult()
    rep = result.report
    rep.commits_in = len(commits)
    for commit in commits:
        keys = link_commit_to_issues(commit, config)
        maintenance = {k for k in keys if k in by_key and by_key[k].issue_type in config.accepted_issue_types}
        if not maintenance:
            rep.no_maintenance_issue += 1
            continue
        classes = map_paths_to_classes(commit.changed_paths, config)
        if not classes:
            rep.no_class_changes += 1
            continue
        if len(keys) != 1:
            rep.multiple_issues += 1
            continue
        cs = ChangeSet(commit.id, next(iter(keys)), frozenset(classes))
        if cs.packages_touched > config.max_scattering:
            rep.scattered += 1
            continue
        result.change_sets.append(cs)
    rep.change_sets_out = len(result.change_sets)
    logger.info(
        "filters: %d in, removed F1=%d F2=%d F3=%d F4=%d, %d change sets",
        rep.commits_in,
        rep.no_maintenance_issue,
        rep.no_class_changes,
        rep.multiple_issues,
        rep.scattered,
        rep.change_sets_out,
    )
    return result
