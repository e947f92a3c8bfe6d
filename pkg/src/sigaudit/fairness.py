"""Per-run drop analysis: significant differences lost when switching qrels.

A run's drop is the number of pairs involving it that are significant under
gold but not under the alternative qrels (its per-run false-negative count,
always >= 0).  The signed difference gold_count - alt_count is also emitted,
since new alternative-only significances can make it negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .significance import SignificanceSet


@dataclass(frozen=True)
class RunSignificanceCounts:
    run_tag: str
    gold_count: int
    alt_count: int


@dataclass(frozen=True)
class DropRow:
    run_tag: str
    gold_count: int
    alt_count: int
    drop: int  # pairs significant under gold but not alternative
    signed_delta: int  # gold_count - alt_count


@dataclass(frozen=True)
class FiveNumber:
    """Min, inclusive-median quartiles, max."""

    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


@dataclass(frozen=True)
class DropReport:
    rows: tuple[DropRow, ...]
    summary: FiveNumber
    mean: float

    @property
    def total_drops(self) -> int:
        return sum(row.drop for row in self.rows)


def _degree_counts(sig: SignificanceSet) -> list[int]:
    counts = [0] * len(sig.run_tags)
    for pair in sig.significant:
        counts[pair.a] += 1
        counts[pair.b] += 1
    return counts


def per_run_counts(sig: SignificanceSet) -> list[RunSignificanceCounts]:
    """Significant-pair count per run for one side (the other side zeroed)."""
    counts = _degree_counts(sig)
    return [
        RunSignificanceCounts(run_tag=tag, gold_count=count, alt_count=0)
        for tag, count in zip(sig.run_tags, counts)
    ]


def _median(sorted_values: Sequence[float]) -> float:
    n = len(sorted_values)
    mid = n // 2
    if n % 2:
        return float(sorted_values[mid])
    return (sorted_values[mid - 1] + sorted_values[mid]) / 2.0


def five_number_summary(values: Sequence[float]) -> FiveNumber:
    """Tukey hinges: quartiles are medians of halves that share the median."""
    if not values:
        raise ValueError("no values to summarize")
    ordered = sorted(float(v) for v in values)
    n = len(ordered)
    lower = ordered[: (n + 1) // 2]
    upper = ordered[n // 2:]
    return FiveNumber(
        minimum=ordered[0],
        q1=_median(lower),
        median=_median(ordered),
        q3=_median(upper),
        maximum=ordered[-1],
    )


def summarize_drops(values: Sequence[float]) -> tuple[FiveNumber, float]:
    """Five-number summary plus mean, shared by single and replicate reports."""
    summary = five_number_summary(values)
    mean = sum(values) / len(values)
    return summary, mean


def per_run_drops(gold: SignificanceSet, alt: SignificanceSet) -> DropReport:
    """Drop per run, plus distribution summary over runs.

    Sum of drops is exactly twice the number of FN pairs: every lost pair
    touches two runs.
    """
    if gold.run_tags != alt.run_tags:
        raise ValueError("gold and alternative significance sets cover different run pools")
    lost = gold.significant - alt.significant
    gold_counts = _degree_counts(gold)
    alt_counts = _degree_counts(alt)
    drops = [0] * len(gold.run_tags)
    for pair in lost:
        drops[pair.a] += 1
        drops[pair.b] += 1
    rows = tuple(
        DropRow(
            run_tag=tag,
            gold_count=gold_counts[i],
            alt_count=alt_counts[i],
            drop=drops[i],
            signed_delta=gold_counts[i] - alt_counts[i],
        )
        for i, tag in enumerate(gold.run_tags)
    )
    summary, mean = summarize_drops(drops)
    return DropReport(rows=rows, summary=summary, mean=mean)
