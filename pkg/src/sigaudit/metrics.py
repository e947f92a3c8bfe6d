"""Per-topic effectiveness metrics (AP, NDCG@k) and the run x topic score matrix."""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from ._csvio import read_csv, write_csv
from .trec_io import Qrels, RankedList, RunPool

log = logging.getLogger(__name__)


def quantize10(x: float) -> float:
    """Round to 10 significant digits; idempotent, matches CSV cell format."""
    return float(f"{x:.10g}")


@dataclass(frozen=True)
class MetricSpec:
    """Which metric to score: kind 'ap' or 'ndcg', evaluation depth, AP threshold.

    ``relevance_threshold`` is the binarization grade for AP (grade >= threshold
    counts as relevant); NDCG uses the graded judgments directly, with linear
    gain unless ``exp_gain`` asks for 2^grade - 1.
    """

    kind: str
    cutoff: int = 1000
    relevance_threshold: int = 2
    exp_gain: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("ap", "ndcg"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        if self.relevance_threshold < 1:
            raise ValueError("relevance_threshold must be >= 1")

    @property
    def label(self) -> str:
        if self.kind == "ap":
            return f"ap@{self.cutoff};rel>={self.relevance_threshold}"
        return f"ndcg@{self.cutoff}" + (";exp" if self.exp_gain else "")

    @classmethod
    def from_label(cls, text: str) -> "MetricSpec":
        parts = text.split(";")
        head = parts[0]
        if "@" not in head:
            raise ValueError(f"bad metric label {text!r}")
        kind, _, cutoff_text = head.partition("@")
        cutoff = int(cutoff_text)
        threshold = 2
        exp_gain = False
        for part in parts[1:]:
            if part.startswith("rel>="):
                threshold = int(part[len("rel>="):])
            elif part == "exp":
                exp_gain = True
            else:
                raise ValueError(f"bad metric label {text!r}")
        return cls(kind=kind, cutoff=cutoff, relevance_threshold=threshold, exp_gain=exp_gain)


def binarize(qrels: Qrels, threshold: int) -> Qrels:
    """Map grade >= threshold to 1, else 0; name records the threshold."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    judgments = {key: (1 if grade >= threshold else 0) for key, grade in qrels.judgments.items()}
    return Qrels(name=f"{qrels.name};rel>={threshold}", judgments=judgments)


def average_precision(ranked: RankedList, qrels: Qrels, topic: str, cutoff: int) -> float:
    """AP = (1/R) * sum of precision at each relevant retrieved rank <= cutoff.

    R counts all relevant documents for the topic, retrieved or not;
    unjudged documents count as non-relevant.
    """
    judged = qrels.judged(topic)
    n_rel = sum(1 for grade in judged.values() if grade > 0)
    if n_rel == 0:
        raise ValueError(f"topic {topic!r} has no relevant documents")
    hits = 0
    precisions: list[float] = []
    for rank, (doc, _) in enumerate(ranked.entries[:cutoff], 1):
        if judged.get(doc, 0) > 0:
            hits += 1
            precisions.append(hits / rank)
    return math.fsum(precisions) / n_rel


def ndcg_at_k(ranked: RankedList, qrels: Qrels, topic: str, k: int,
              exp_gain: bool = False) -> float:
    """NDCG@k with log2(r+1) discount; ideal ranking from all judged documents."""
    judged = qrels.judged(topic)
    if exp_gain:
        gains = {doc: float(2**grade - 1) for doc, grade in judged.items()}
    else:
        gains = {doc: float(grade) for doc, grade in judged.items()}
    ideal = sorted(gains.values(), reverse=True)[:k]
    idcg = math.fsum(g / math.log2(r + 1) for r, g in enumerate(ideal, 1))
    if idcg == 0.0:
        raise ValueError(f"topic {topic!r} has no relevant documents")
    dcg = math.fsum(
        gains.get(doc, 0.0) / math.log2(rank + 1)
        for rank, (doc, _) in enumerate(ranked.entries[:k], 1)
    )
    return dcg / idcg


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Per-topic scores: rows = runs (pool order), columns = sorted topics."""

    run_tags: tuple[str, ...]
    topic_ids: tuple[str, ...]
    values: np.ndarray
    metric: MetricSpec
    qrels_name: str

    def __post_init__(self) -> None:
        m, n = len(self.run_tags), len(self.topic_ids)
        if self.values.shape != (m, n):
            raise ValueError(f"values shape {self.values.shape} != ({m}, {n})")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("scores must be finite")
        if np.any((self.values < 0.0) | (self.values > 1.0)):
            raise ValueError("scores must lie in [0, 1]")

    def subset(self, topic_ids: Iterable[str]) -> "ScoreMatrix":
        """Column slice onto the given topics (re-sorted); equals rebuilding."""
        wanted = sorted(set(topic_ids))
        index = {t: i for i, t in enumerate(self.topic_ids)}
        missing = [t for t in wanted if t not in index]
        if missing:
            raise ValueError(f"topics not in matrix: {missing}")
        cols = [index[t] for t in wanted]
        return replace(
            self, topic_ids=tuple(wanted), values=np.ascontiguousarray(self.values[:, cols])
        )

    def quantized(self) -> "ScoreMatrix":
        """Values rounded to the 10-significant-digit CSV precision."""
        rounded = np.array(
            [[quantize10(v) for v in row] for row in self.values], dtype=np.float64
        ).reshape(self.values.shape)
        return replace(self, values=rounded)


def build_score_matrix(
    pool: RunPool,
    qrels: Qrels,
    spec: MetricSpec,
    topics: Iterable[str] | None = None,
) -> ScoreMatrix:
    """Score every (run, topic) cell; drop topics with no relevant documents.

    A run with no retrieved list for a topic scores 0 there.  For AP the
    qrels are binarized at ``spec.relevance_threshold`` first, so topics
    losing all relevance in binarization are dropped too.
    """
    if spec.kind == "ap":
        work = binarize(qrels, spec.relevance_threshold)
    else:
        work = qrels
    if topics is None:
        candidates = list(work.topics)
    else:
        candidates = sorted(set(topics))
        unknown = [t for t in candidates if t not in set(qrels.topics)]
        if unknown:
            raise ValueError(f"topics not in qrels {qrels.name!r}: {unknown}")
    bearing = set(work.relevant_topics())
    kept = [t for t in candidates if t in bearing]
    dropped = [t for t in candidates if t not in bearing]
    if dropped:
        log.warning(
            "%s: dropped %d topic(s) with no relevant documents: %s",
            qrels.name, len(dropped), " ".join(dropped),
        )
    if not kept:
        raise ValueError(f"no topics with relevant documents under qrels {qrels.name!r}")
    values = np.zeros((len(pool), len(kept)), dtype=np.float64)
    for i, run in enumerate(pool):
        for j, topic in enumerate(kept):
            ranked = run.lists.get(topic)
            if ranked is None:
                continue  # missing topic scores 0
            if spec.kind == "ap":
                values[i, j] = average_precision(ranked, work, topic, spec.cutoff)
            else:
                values[i, j] = ndcg_at_k(ranked, work, topic, spec.cutoff, spec.exp_gain)
    return ScoreMatrix(
        run_tags=pool.tags(),
        topic_ids=tuple(kept),
        values=values,
        metric=spec,
        qrels_name=qrels.name,
    )


def write_matrix_csv(matrix: ScoreMatrix, path: str | os.PathLike) -> None:
    """Header ``run,<topic>,...``; one row per run; 10 significant digits."""
    rows = (
        [tag] + [f"{v:.10g}" for v in matrix.values[i]]
        for i, tag in enumerate(matrix.run_tags)
    )
    write_csv(
        path,
        [("metric", matrix.metric.label), ("qrels", matrix.qrels_name)],
        ["run"] + list(matrix.topic_ids),
        rows,
    )


def read_matrix_csv(path: str | os.PathLike) -> ScoreMatrix:
    meta, header, rows = read_csv(path)
    if not header or header[0] != "run":
        raise ValueError(f"{os.fspath(path)}: expected header starting with 'run'")
    if "metric" not in meta:
        raise ValueError(f"{os.fspath(path)}: missing '# metric=' metadata")
    topic_ids = tuple(header[1:])
    tags: list[str] = []
    values = np.zeros((len(rows), len(topic_ids)), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{os.fspath(path)}: row {i + 2} has {len(row)} fields")
        tags.append(row[0])
        values[i] = [float(cell) for cell in row[1:]]
    return ScoreMatrix(
        run_tags=tuple(tags),
        topic_ids=topic_ids,
        values=values,
        metric=MetricSpec.from_label(meta["metric"]),
        qrels_name=meta.get("qrels", ""),
    )
