"""Parsers and data model for TREC-format run and qrels files.

Run format:   ``topic Q0 docid rank score tag`` (whitespace separated).
Qrels format: ``topic iteration docid grade``.
Blank lines and lines starting with ``#`` are skipped in both formats.
Topic and document identifiers compare as exact strings; "019" != "19".
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator


class ParseError(ValueError):
    """Raised for malformed or inconsistent evaluation input files."""


def _lines(stream: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    for line_no, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield line_no, line.split()


@dataclass(frozen=True)
class RankedList:
    """One topic's retrieved documents: (doc_id, score), best first.

    Order is score descending with ties broken by doc id descending, the
    convention of the standard TREC evaluation tool; AP and NDCG depend
    on it, so it is fixed here rather than configurable.
    """

    entries: tuple[tuple[str, float], ...]

    @classmethod
    def from_unsorted(cls, entries: Iterable[tuple[str, float]]) -> "RankedList":
        items = sorted(entries, key=lambda e: e[0], reverse=True)
        items.sort(key=lambda e: e[1], reverse=True)  # stable: doc-desc kept within ties
        return cls(tuple(items))

    def doc_ids(self) -> tuple[str, ...]:
        return tuple(doc for doc, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Run:
    """A retrieval run: unique tag plus one ranked list per topic."""

    tag: str
    lists: dict[str, RankedList]

    def topics(self) -> tuple[str, ...]:
        return tuple(sorted(self.lists))


@dataclass(frozen=True)
class RunPool:
    """Runs under evaluation, ordered by tag so pool order is reproducible."""

    runs: tuple[Run, ...]

    @classmethod
    def from_runs(cls, runs: Iterable[Run]) -> "RunPool":
        ordered = sorted(runs, key=lambda r: r.tag)
        seen: dict[str, Run] = {}
        for run in ordered:
            if run.tag in seen:
                raise ParseError(f"duplicate run tag {run.tag!r}")
            seen[run.tag] = run
        return cls(tuple(ordered))

    def tags(self) -> tuple[str, ...]:
        return tuple(run.tag for run in self.runs)

    def __len__(self) -> int:
        return len(self.runs)

    def __iter__(self) -> Iterator[Run]:
        return iter(self.runs)


@dataclass(frozen=True)
class Qrels:
    """Relevance judgments: (topic, doc) -> integer grade >= 0.

    ``clamped`` counts negative input grades clamped to 0; ``duplicates``
    counts repeated (topic, doc) lines that carried the identical grade.
    """

    name: str
    judgments: dict[tuple[str, str], int]
    clamped: int = 0
    duplicates: int = 0
    _topics: tuple[str, ...] = field(init=False, compare=False, repr=False)
    _by_topic: dict[str, dict[str, int]] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        by_topic: dict[str, dict[str, int]] = {}
        for (topic, doc), grade in self.judgments.items():
            by_topic.setdefault(topic, {})[doc] = grade
        object.__setattr__(self, "_by_topic", by_topic)
        object.__setattr__(self, "_topics", tuple(sorted(by_topic)))

    @property
    def topics(self) -> tuple[str, ...]:
        return self._topics

    def grade(self, topic: str, doc: str) -> int:
        return self._by_topic.get(topic, {}).get(doc, 0)

    def judged(self, topic: str) -> dict[str, int]:
        """All judged documents for one topic (empty dict if none)."""
        return self._by_topic.get(topic, {})

    def relevant_topics(self) -> tuple[str, ...]:
        """Topics with at least one document of grade > 0."""
        return tuple(t for t in self._topics if any(g > 0 for g in self._by_topic[t].values()))


def parse_run_file(stream: Iterable[str], tag_override: str | None = None,
                   source: str = "<run>") -> Run:
    """Parse one TREC run file; lists are re-sorted by (score desc, doc desc)."""
    per_topic: dict[str, list[tuple[str, float]]] = {}
    seen: set[tuple[str, str]] = set()
    file_tag: str | None = None
    for line_no, fields in _lines(stream):
        if len(fields) != 6:
            raise ParseError(f"{source}:{line_no}: expected 6 fields, got {len(fields)}")
        topic, _, doc, _, score_text, tag = fields
        try:
            score = float(score_text)
        except ValueError:
            raise ParseError(f"{source}:{line_no}: invalid score {score_text!r}") from None
        if not math.isfinite(score):
            raise ParseError(f"{source}:{line_no}: non-finite score {score_text!r}")
        if file_tag is None:
            file_tag = tag
        elif tag != file_tag:
            raise ParseError(f"{source}:{line_no}: run tag {tag!r} conflicts with {file_tag!r}")
        if (topic, doc) in seen:
            raise ParseError(f"{source}:{line_no}: duplicate document {doc!r} for topic {topic!r}")
        seen.add((topic, doc))
        per_topic.setdefault(topic, []).append((doc, score))
    if file_tag is None:
        raise ParseError(f"{source}: empty run file")
    lists = {t: RankedList.from_unsorted(es) for t, es in per_topic.items()}
    return Run(tag=tag_override if tag_override is not None else file_tag, lists=lists)


def parse_qrels_file(stream: Iterable[str], name: str, source: str = "<qrels>") -> Qrels:
    """Parse one qrels file; negative grades clamp to 0 with a warning count."""
    judgments: dict[tuple[str, str], int] = {}
    clamped = 0
    duplicates = 0
    for line_no, fields in _lines(stream):
        if len(fields) != 4:
            raise ParseError(f"{source}:{line_no}: expected 4 fields, got {len(fields)}")
        topic, _, doc, grade_text = fields
        try:
            grade = int(grade_text)
        except ValueError:
            raise ParseError(f"{source}:{line_no}: invalid grade {grade_text!r}") from None
        if grade < 0:
            grade = 0
            clamped += 1
        key = (topic, doc)
        if key in judgments:
            if judgments[key] != grade:
                raise ParseError(
                    f"{source}:{line_no}: conflicting grades for topic {topic!r} doc {doc!r}"
                )
            duplicates += 1
            continue
        judgments[key] = grade
    return Qrels(name=name, judgments=judgments, clamped=clamped, duplicates=duplicates)


def read_run(path: str | os.PathLike, tag_override: str | None = None) -> Run:
    with open(path, encoding="utf-8") as handle:
        return parse_run_file(handle, tag_override=tag_override, source=str(path))


def read_qrels(path: str | os.PathLike, name: str | None = None) -> Qrels:
    if name is None:
        name = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    with open(path, encoding="utf-8") as handle:
        return parse_qrels_file(handle, name=name, source=str(path))


def read_run_dir(path: str | os.PathLike) -> RunPool:
    """Read every regular file in a directory as one run; pool sorted by tag."""
    names = sorted(
        entry
        for entry in os.listdir(path)
        if not entry.startswith(".") and os.path.isfile(os.path.join(path, entry))
    )
    if not names:
        raise ParseError(f"{os.fspath(path)}: no run files found")
    runs: list[Run] = []
    sources: dict[str, str] = {}
    for entry in names:
        full = os.path.join(path, entry)
        run = read_run(full)
        if run.tag in sources:
            raise ParseError(
                f"{full}: run tag {run.tag!r} already used by {sources[run.tag]}"
            )
        sources[run.tag] = full
        runs.append(run)
    return RunPool.from_runs(runs)


def write_run(run: Run, stream: IO[str]) -> None:
    """Serialize a run in TREC format; ranks recomputed from list order."""
    for topic in sorted(run.lists):
        for rank, (doc, score) in enumerate(run.lists[topic].entries, 1):
            stream.write(f"{topic} Q0 {doc} {rank} {score!r} {run.tag}\n")


@dataclass(frozen=True)
class CollectionStats:
    """Shape summary of a (run pool, qrels) collection."""

    runs: int
    pairs: int
    topics: int
    topics_with_relevant: int
    avg_judgments_per_topic: float
    missing_topics: dict[str, int]  # run tag -> qrels topics with no retrieved list


def validate_collection(pool: RunPool, qrels: Qrels) -> CollectionStats:
    """Check a pool/qrels pairing is testable and summarize its shape."""
    m = len(pool)
    if m < 2:
        raise ValueError(f"need at least 2 runs to form pairs, got {m}")
    topics = qrels.topics
    missing = {
        run.tag: sum(1 for t in topics if t not in run.lists) for run in pool
    }
    avg = len(qrels.judgments) / len(topics) if topics else 0.0
    return CollectionStats(
        runs=m,
        pairs=m * (m - 1) // 2,
        topics=len(topics),
        topics_with_relevant=len(qrels.relevant_topics()),
        avg_judgments_per_topic=avg,
        missing_topics=missing,
    )
