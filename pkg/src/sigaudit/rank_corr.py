"""Correlate gold and alternative pair rankings induced by p-values.

Pairs are ranked by p-value ascending (most significant first) with ties
broken by canonical pair id, giving a deterministic total order.  Kendall's
tau-b handles the abundant ties of grid-valued p-values; rank-biased overlap
(RBO) adds a top-weighted view controlled by its persistence parameter p.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .significance import PairId, PValueTable

DEFAULT_RBO_P = 0.07


@dataclass(frozen=True)
class PairRanking:
    """All run pairs ordered by (p-value ascending, pair id ascending)."""

    items: tuple[PairId, ...]
    pvalues: tuple[float, ...]
    tie_groups: tuple[tuple[int, ...], ...]  # positions sharing one p-value


@dataclass(frozen=True)
class CorrelationReport:
    kendall_tau: float
    rbo: float
    rbo_p: float


def rank_pairs_by_pvalue(table: PValueTable) -> PairRanking:
    """Deterministic ranking: smaller p first, ties by canonical pair id."""
    order = sorted(table.pvalues.items(), key=lambda kv: (kv[1], kv[0]))
    items = tuple(pair for pair, _ in order)
    pvalues = tuple(p for _, p in order)
    groups: list[tuple[int, ...]] = []
    start = 0
    for pos in range(1, len(pvalues) + 1):
        if pos == len(pvalues) or pvalues[pos] != pvalues[start]:
            groups.append(tuple(range(start, pos)))
            start = pos
    return PairRanking(items=items, pvalues=pvalues, tie_groups=tuple(groups))


def _count_inversions(seq: list) -> int:
    """Strict inversions (i < j with seq[i] > seq[j]) by bottom-up merge sort."""
    n = len(seq)
    buf = list(seq)
    tmp = list(seq)
    count = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if buf[j] < buf[i]:
                    count += mid - i
                    tmp[k] = buf[j]
                    j += 1
                else:
                    tmp[k] = buf[i]
                    i += 1
                k += 1
            tmp[k:hi] = buf[i:mid] if i < mid else buf[j:hi]
        buf, tmp = tmp, buf
        width *= 2
    return count


def _pair_scores(gold: PairRanking, alt: PairRanking) -> list[tuple[float, float]]:
    if set(gold.items) != set(alt.items) or len(gold.items) != len(alt.items):
        raise ValueError("rankings cover different item sets")
    alt_p = dict(zip(alt.items, alt.pvalues))
    return [(p, alt_p[item]) for item, p in zip(gold.items, gold.pvalues)]


def kendall_tau(gold: PairRanking, alt: PairRanking) -> float:
    """Tau-b from the two p-value orderings; ties contribute per the formula.

    tau-b = (C - D) / sqrt((n0 - n1)(n0 - n2)) with n0 = n(n-1)/2 and
    n1, n2 the tied-pair counts within gold and alt.  All counting is in
    exact integers; only the final quotient is floating point.
    """
    scores = _pair_scores(gold, alt)
    n = len(scores)
    if n < 2:
        raise ValueError("need at least 2 items to correlate")
    scores.sort()
    ys = [y for _, y in scores]
    dis = _count_inversions(ys)
    n0 = n * (n - 1) // 2
    n1 = sum(t * (t - 1) // 2 for t in Counter(x for x, _ in scores).values())
    n2 = sum(t * (t - 1) // 2 for t in Counter(ys).values())
    n3 = sum(t * (t - 1) // 2 for t in Counter(scores).values())
    concordant_minus_discordant = n0 - n1 - n2 + n3 - 2 * dis
    denom_sq = (n0 - n1) * (n0 - n2)
    if denom_sq == 0:
        raise ValueError("tau-b undefined: one ranking has all items tied")
    return concordant_minus_discordant / math.sqrt(denom_sq)


def rank_biased_overlap(gold: PairRanking, alt: PairRanking,
                        p: float = DEFAULT_RBO_P) -> float:
    """Conjoint RBO: sum over depths d of (1-p) p^(d-1) A_d plus p^k A_k.

    A_d is the fraction of each depth-d prefix shared by both rankings.
    Computed as 1 minus the weighted disagreement so identical rankings
    yield exactly 1.0.
    """
    if not (0.0 < p < 1.0):
        raise ValueError("rbo persistence p must lie in (0, 1)")
    if set(gold.items) != set(alt.items) or len(gold.items) != len(alt.items):
        raise ValueError("rankings are not conjoint")
    k = len(gold.items)
    alt_pos = {item: i for i, item in enumerate(alt.items)}
    # histogram of the depth at which each item enters both prefixes
    entry = [0] * (k + 1)
    for i, item in enumerate(gold.items):
        entry[max(i, alt_pos[item]) + 1] += 1
    overlap = 0
    terms: list[float] = []
    for d in range(1, k + 1):
        overlap += entry[d]
        terms.append((1.0 - p) * pow(p, d - 1) * ((d - overlap) / d))
    # conjoint full rankings: overlap at depth k is k, so the p^k tail
    # term carries agreement 1 and adds no disagreement
    if overlap != k:
        raise ValueError("rankings are not conjoint")
    return 1.0 - math.fsum(terms)


def compare_rankings(gold: PairRanking, alt: PairRanking,
                     rbo_p: float = DEFAULT_RBO_P) -> CorrelationReport:
    return CorrelationReport(
        kendall_tau=kendall_tau(gold, alt),
        rbo=rank_biased_overlap(gold, alt, rbo_p),
        rbo_p=rbo_p,
    )
