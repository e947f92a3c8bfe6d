"""Pairwise decision confusion: TP/FN/FP/TN counts and exact rates."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigaudit.agreement import (
    ConfusionRates,
    classify_pairs,
    confusion_rates,
    format_rate,
)
from sigaudit.significance import PairId, SignificanceSet, all_pairs


def sig(tags, pairs, alpha=0.05):
    return SignificanceSet(run_tags=tuple(tags), alpha=alpha, significant=frozenset(pairs))


TAGS3 = ("a", "b", "c")


class TestClassifyPairs:
    def test_labels_cover_all_pairs(self):
        gold = sig(TAGS3, {PairId(0, 1), PairId(0, 2)})
        alt = sig(TAGS3, {PairId(0, 1), PairId(1, 2)})
        cls = classify_pairs(gold, alt)
        assert [c.pair for c in cls] == all_pairs(3)
        by_pair = {c.pair: c.label for c in cls}
        assert by_pair == {
            PairId(0, 1): "TP",  # significant in both
            PairId(0, 2): "FN",  # lost by the alternative
            PairId(1, 2): "FP",  # invented by the alternative
        }

    def test_tn_label(self):
        gold = sig(TAGS3, set())
        alt = sig(TAGS3, set())
        assert all(c.label == "TN" for c in classify_pairs(gold, alt))

    def test_mismatched_pools_rejected(self):
        gold = sig(("a", "b"), set())
        alt = sig(("a", "x"), set())
        with pytest.raises(ValueError):
            classify_pairs(gold, alt)

    def test_swap_exchanges_fn_and_fp(self):
        gold = sig(TAGS3, {PairId(0, 1)})
        alt = sig(TAGS3, {PairId(1, 2)})
        fwd = {c.pair: c.label for c in classify_pairs(gold, alt)}
        rev = {c.pair: c.label for c in classify_pairs(alt, gold)}
        flip = {"FN": "FP", "FP": "FN", "TP": "TP", "TN": "TN"}
        assert rev == {pair: flip[label] for pair, label in fwd.items()}


class TestConfusionRates:
    def test_counts_and_percentages(self):
        gold = sig(TAGS3, {PairId(0, 1), PairId(0, 2)})
        alt = sig(TAGS3, {PairId(0, 1), PairId(1, 2)})
        rates = confusion_rates(classify_pairs(gold, alt))
        assert (rates.tp, rates.fn, rates.tn, rates.fp) == (1, 1, 0, 1)
        assert rates.gold_positive_count == 2
        assert rates.gold_negative_count == 1
        assert rates.tp_pct == Fraction(50)
        assert rates.fn_pct == Fraction(50)
        assert rates.fp_pct == Fraction(100)
        assert rates.tn_pct == Fraction(0)

    def test_identity_is_all_tp_and_tn(self):
        gold = sig(TAGS3, {PairId(0, 2)})
        rates = confusion_rates(classify_pairs(gold, gold))
        assert rates.fn == 0 and rates.fp == 0
        assert rates.tp_pct == Fraction(100)
        assert rates.tn_pct == Fraction(100)

    def test_empty_gold_class_gives_none(self):
        gold = sig(TAGS3, set())
        alt = sig(TAGS3, {PairId(0, 1)})
        rates = confusion_rates(classify_pairs(gold, alt))
        assert rates.tp_pct is None
        assert rates.fn_pct is None
        assert rates.fp_pct == Fraction(100, 3)

    def test_no_pairs_rejected(self):
        with pytest.raises(ValueError):
            confusion_rates([])

    def test_rates_are_exact_fractions(self):
        rates = ConfusionRates(tp=1, fn=2, tn=3, fp=1)
        assert rates.tp_pct == Fraction(100, 3)
        assert rates.fn_pct == Fraction(200, 3)
        assert rates.tp_pct + rates.fn_pct == Fraction(100)
        assert rates.tn_pct + rates.fp_pct == Fraction(100)


class TestFormatRate:
    def test_na_and_digits(self):
        assert format_rate(None) == "NA"
        assert format_rate(Fraction(100, 3)) == "33.33333333"
        assert format_rate(Fraction(50)) == "50"


@settings(max_examples=60, deadline=None)
@given(
    m=st.integers(2, 6),
    data=st.data(),
)
def test_confusion_identities_property(m, data):
    """tp+fn = gold positives, tn+fp = gold negatives, pcts sum to 100."""
    pairs = all_pairs(m)
    gold_set = data.draw(st.sets(st.sampled_from(pairs)))
    alt_set = data.draw(st.sets(st.sampled_from(pairs)))
    tags = tuple(f"r{i}" for i in range(m))
    rates = confusion_rates(classify_pairs(sig(tags, gold_set), sig(tags, alt_set)))
    assert rates.tp + rates.fn == rates.gold_positive_count == len(gold_set)
    assert rates.tn + rates.fp == rates.gold_negative_count == len(pairs) - len(gold_set)
    if rates.gold_positive_count:
        assert rates.tp_pct + rates.fn_pct == Fraction(100)
    else:
        assert rates.tp_pct is None and rates.fn_pct is None
    if rates.gold_negative_count:
        assert rates.tn_pct + rates.fp_pct == Fraction(100)
    else:
        assert rates.tn_pct is None and rates.fp_pct is None


@settings(max_examples=30, deadline=None)
@given(m=st.integers(2, 6), data=st.data())
def test_identity_audit_exact_property(m, data):
    """alt == gold gives TP=100%, TN=100% (when classes are non-empty)."""
    pairs = all_pairs(m)
    gold_set = data.draw(st.sets(st.sampled_from(pairs)))
    tags = tuple(f"r{i}" for i in range(m))
    s = sig(tags, gold_set)
    rates = confusion_rates(classify_pairs(s, s))
    if gold_set:
        assert rates.tp_pct == Fraction(100)
    if len(gold_set) < len(pairs):
        assert rates.tn_pct == Fraction(100)
    assert rates.fn == 0 and rates.fp == 0
