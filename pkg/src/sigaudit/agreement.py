"""Classify each run pair's significance decision under alternative vs gold qrels.

Gold is the reference: TP = significant under both, FN = significant under
gold only, FP = significant under alternative only, TN = under neither.
Rates are percentages over the gold counts (TP + FN = 100, TN + FP = 100)
kept as exact rationals internally; a gold class with no members yields NA.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .significance import PairId, SignificanceSet, all_pairs


@dataclass(frozen=True)
class PairClassification:
    pair: PairId
    gold_significant: bool
    alt_significant: bool

    @property
    def label(self) -> str:
        if self.gold_significant:
            return "TP" if self.alt_significant else "FN"
        return "FP" if self.alt_significant else "TN"


@dataclass(frozen=True)
class ConfusionRates:
    """Confusion counts plus exact percentage rates over the gold classes."""

    tp: int
    fn: int
    tn: int
    fp: int

    @property
    def gold_positive_count(self) -> int:
        return self.tp + self.fn

    @property
    def gold_negative_count(self) -> int:
        return self.tn + self.fp

    @property
    def tp_pct(self) -> Fraction | None:
        return self._over_positives(self.tp)

    @property
    def fn_pct(self) -> Fraction | None:
        return self._over_positives(self.fn)

    @property
    def tn_pct(self) -> Fraction | None:
        return self._over_negatives(self.tn)

    @property
    def fp_pct(self) -> Fraction | None:
        return self._over_negatives(self.fp)

    def _over_positives(self, count: int) -> Fraction | None:
        total = self.gold_positive_count
        if total == 0:
            return None
        return Fraction(100 * count, total)

    def _over_negatives(self, count: int) -> Fraction | None:
        total = self.gold_negative_count
        if total == 0:
            return None
        return Fraction(100 * count, total)


def classify_pairs(gold: SignificanceSet, alt: SignificanceSet) -> list[PairClassification]:
    """One classification per canonical pair over the shared run pool."""
    if gold.run_tags != alt.run_tags:
        raise ValueError("gold and alternative significance sets cover different run pools")
    return [
        PairClassification(
            pair=pair,
            gold_significant=pair in gold.significant,
            alt_significant=pair in alt.significant,
        )
        for pair in all_pairs(len(gold.run_tags))
    ]


def confusion_rates(classifications: Sequence[PairClassification]) -> ConfusionRates:
    """Count the four labels; rates are derived properties."""
    if not classifications:
        raise ValueError("no pair classifications given")
    counts = {"TP": 0, "FN": 0, "TN": 0, "FP": 0}
    for cls in classifications:
        counts[cls.label] += 1
    return ConfusionRates(tp=counts["TP"], fn=counts["FN"], tn=counts["TN"], fp=counts["FP"])


def format_rate(value: Fraction | None, digits: int = 10) -> str:
    """Render a percentage rate for reports; NA for empty gold classes."""
    if value is None:
        return "NA"
    return f"{float(value):.{digits}g}"
