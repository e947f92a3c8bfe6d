"""Topic undersampling and replicate averaging.

The alternative qrels usually cover more topics than the gold set, which
alone inflates significance counts.  To compare fairly, random topic subsets
of the alternative set are drawn to match the gold topic count, the whole
downstream pipeline runs per subset, and rates are averaged over replicates
("average of ratios", not recomputed from pooled counts).

Sampling randomness is counter-based: iteration i draws from the Philox
stream keyed (seed, sample-domain) at counter [*, i, 0, 0], so replicates
are independent, reproducible, and order-insensitive.  All Tukey tests in
one audit share the master seed: with common permutation noise, identical
score matrices get identical p-values, so auditing a qrels set against
itself is exact (TP 100, tau 1, RBO 1, drops 0).
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from ._philox import SAMPLE_DOMAIN, ShuffleStreams
from .agreement import ConfusionRates, classify_pairs, confusion_rates
from .fairness import DropReport, FiveNumber, per_run_drops, summarize_drops
from .metrics import MetricSpec, ScoreMatrix, build_score_matrix
from .rank_corr import (
    DEFAULT_RBO_P,
    CorrelationReport,
    compare_rankings,
    rank_pairs_by_pvalue,
)
from .significance import PValueTable, randomized_tukey_hsd, significant_set
from .trec_io import Qrels, RunPool

DEFAULT_ITERATIONS = 50

RATE_FIELDS = ("tp_pct", "fn_pct", "tn_pct", "fp_pct")
VALUE_FIELDS = RATE_FIELDS + ("tau", "rbo", "mean_drop")


def undersample_topics(topics: Iterable[str], size: int, seed: int, iteration: int) -> set[str]:
    """Uniform sample of exactly `size` topics, a pure function of its arguments."""
    pool = sorted(topics)
    n = len(pool)
    if size < 1:
        raise ValueError("sample size must be >= 1")
    if size > n:
        raise ValueError(f"sample size {size} exceeds {n} topics")
    if iteration < 0:
        raise ValueError("iteration must be >= 0")
    if size == n:
        return set(pool)
    streams = ShuffleStreams(
        seed, SAMPLE_DOMAIN,
        np.array([iteration], dtype=np.uint64), np.zeros(1, dtype=np.uint64),
    )
    idx = list(range(n))
    for i in range(size):  # partial Fisher-Yates: first `size` slots
        j = i + int(streams.bounded(n - i)[0])
        idx[i], idx[j] = idx[j], idx[i]
    return {pool[k] for k in idx[:size]}


@dataclass(frozen=True)
class ReplicateConfig:
    iterations: int
    seed: int
    target_size: int

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.target_size < 1:
            raise ValueError("target_size must be >= 1")


@dataclass(frozen=True)
class ReplicateResult:
    """Everything measured for one sampled topic subset."""

    iteration: int
    topic_ids: tuple[str, ...]
    rates: ConfusionRates
    correlation: CorrelationReport
    drops: DropReport

    def value(self, field: str) -> float | None:
        if field in RATE_FIELDS:
            rate = getattr(self.rates, field)
            return None if rate is None else float(rate)
        if field == "tau":
            return self.correlation.kendall_tau
        if field == "rbo":
            return self.correlation.rbo
        if field == "mean_drop":
            return self.drops.mean
        raise KeyError(field)


@dataclass(frozen=True)
class FieldStats:
    """Mean and sample stddev of one field across iterations, NAs excluded."""

    mean: float | None
    stddev: float | None
    excluded: int


@dataclass(frozen=True)
class ReplicateReport:
    per_iteration: tuple[ReplicateResult, ...]
    stats: dict[str, FieldStats]
    per_run_mean_drops: tuple[tuple[str, float], ...]
    drop_summary: FiveNumber
    drop_mean: float


def _field_stats(results: tuple[ReplicateResult, ...], field: str) -> FieldStats:
    if field in RATE_FIELDS:
        rates: list[Fraction] = []
        excluded = 0
        for result in results:
            rate = getattr(result.rates, field)
            if rate is None:
                excluded += 1
            else:
                rates.append(rate)
        if not rates:
            return FieldStats(mean=None, stddev=None, excluded=excluded)
        mean = float(statistics.mean(rates))  # exact rational mean, then one rounding
        floats = [float(r) for r in rates]
        stddev = statistics.stdev(floats) if len(floats) > 1 else None
        return FieldStats(mean=mean, stddev=stddev, excluded=excluded)
    values = [result.value(field) for result in results]
    floats = [v for v in values if v is not None]
    mean = statistics.fmean(floats)
    stddev = statistics.stdev(floats) if len(floats) > 1 else None
    return FieldStats(mean=mean, stddev=stddev, excluded=0)


def run_replicates(
    pool: RunPool,
    gold_qrels: Qrels,
    alt_qrels: Qrels,
    spec: MetricSpec,
    cfg: ReplicateConfig,
    permutations: int,
    alpha: float,
    *,
    rbo_p: float = DEFAULT_RBO_P,
    workers: int = 0,
    gold_table: PValueTable | None = None,
    alt_matrix: ScoreMatrix | None = None,
) -> ReplicateReport:
    """Undersample the alternative topics `iterations` times and average.

    The gold side is computed once on its full topic set.  Precomputed
    ``gold_table`` / full-topic ``alt_matrix`` may be passed to avoid
    repeating work the caller already did; they must come from the same
    pool, qrels, and spec.
    """
    if cfg.target_size > len(alt_qrels.topics):
        raise ValueError(
            f"target_size {cfg.target_size} exceeds {len(alt_qrels.topics)} alternative topics"
        )
    if gold_table is None:
        gold_matrix = build_score_matrix(pool, gold_qrels, spec)
        gold_table = randomized_tukey_hsd(
            gold_matrix, permutations, cfg.seed, workers=workers, alpha_hint=alpha
        )
    if alt_matrix is None:
        alt_matrix = build_score_matrix(pool, alt_qrels, spec)
    gold_sig = significant_set(gold_table, alpha)
    gold_ranking = rank_pairs_by_pvalue(gold_table)
    bearing = set(alt_matrix.topic_ids)

    results: list[ReplicateResult] = []
    for iteration in range(cfg.iterations):
        sampled = undersample_topics(alt_qrels.topics, cfg.target_size, cfg.seed, iteration)
        kept = sorted(sampled & bearing)
        if not kept:
            raise ValueError(
                f"iteration {iteration}: sampled topic set has no relevant-bearing topics"
            )
        subset = alt_matrix.subset(kept)
        alt_table = randomized_tukey_hsd(
            subset, permutations, cfg.seed, workers=workers, alpha_hint=alpha
        )
        alt_sig = significant_set(alt_table, alpha)
        rates = confusion_rates(classify_pairs(gold_sig, alt_sig))
        correlation = compare_rankings(gold_ranking, rank_pairs_by_pvalue(alt_table), rbo_p)
        drops = per_run_drops(gold_sig, alt_sig)
        results.append(
            ReplicateResult(
                iteration=iteration,
                topic_ids=tuple(kept),
                rates=rates,
                correlation=correlation,
                drops=drops,
            )
        )

    frozen = tuple(results)
    stats = {field: _field_stats(frozen, field) for field in VALUE_FIELDS}
    iters = len(frozen)
    run_tags = gold_table.run_tags
    per_run = tuple(
        (tag, sum(result.drops.rows[i].drop for result in frozen) / iters)
        for i, tag in enumerate(run_tags)
    )
    summary, drop_mean = summarize_drops([mean for _, mean in per_run])
    return ReplicateReport(
        per_iteration=frozen,
        stats=stats,
        per_run_mean_drops=per_run,
        drop_summary=summary,
        drop_mean=drop_mean,
    )
