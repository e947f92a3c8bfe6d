"""Pairwise significance via the two-sided randomized Tukey HSD permutation test.

For runs i, j the observed statistic is |mean_i - mean_j| over topics.  Each
permutation independently shuffles every topic column across runs and takes
M_b = max per-run mean - min per-run mean; p_ij is the fraction of the B
permutations with M_b >= d_ij.  Comparing every pair against the same maximum
statistic controls family-wise error.  Internally sums are used instead of
means (same comparisons, no division), keeping both kernel backends
bit-identical.

p-values are the plain count/B estimator: p = 0 is possible and granularity
is 1/B.  Significance is strict: p < alpha.
"""

from __future__ import annotations

import itertools
import math
import os
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._csvio import read_csv, write_csv
from ._kernel import max_stat_sample

DEFAULT_PERMUTATIONS = 100_000
DEFAULT_ALPHA = 0.05


class PairId(NamedTuple):
    """Canonical run pair: indices into the pool order, a < b."""

    a: int
    b: int


def canonical_pair(i: int, j: int) -> PairId:
    if i == j:
        raise ValueError("a pair needs two distinct runs")
    return PairId(i, j) if i < j else PairId(j, i)


def all_pairs(m: int) -> list[PairId]:
    return [PairId(a, b) for a in range(m) for b in range(a + 1, m)]


@dataclass(frozen=True)
class PValueTable:
    """p-values for every canonical run pair, plus how they were computed."""

    run_tags: tuple[str, ...]
    pvalues: dict[PairId, float]
    permutations: int
    seed: int
    alpha_hint: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        m = len(self.run_tags)
        if m < 2:
            raise ValueError("need at least 2 runs")
        expected = set(all_pairs(m))
        if set(self.pvalues) != expected:
            raise ValueError(f"expected {len(expected)} canonical pairs, got {len(self.pvalues)}")
        for pair, p in self.pvalues.items():
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"pair {pair}: p-value {p} outside [0, 1]")

    def pairs(self) -> list[PairId]:
        return all_pairs(len(self.run_tags))


@dataclass(frozen=True)
class SignificanceSet:
    """Pairs significant at level alpha (strict p < alpha)."""

    run_tags: tuple[str, ...]
    alpha: float
    significant: frozenset[PairId]


def _unpack(matrix) -> tuple[np.ndarray, tuple[str, ...]]:
    if hasattr(matrix, "values") and hasattr(matrix, "run_tags"):
        return np.asarray(matrix.values, dtype=np.float64), tuple(matrix.run_tags)
    values = np.asarray(matrix, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("expected a 2-d score matrix")
    return values, tuple(f"run{i}" for i in range(values.shape[0]))


def _observed_sums(values: np.ndarray) -> np.ndarray:
    # Same accumulation order as the permutation kernel, for exact comparisons.
    m, n = values.shape
    sums = np.zeros(m, dtype=np.float64)
    for j in range(n):
        sums += values[:, j]
    return sums


def _table_from_stat(
    values: np.ndarray,
    run_tags: tuple[str, ...],
    stat: np.ndarray,
    permutations: int,
    seed: int,
    alpha_hint: float,
) -> PValueTable:
    sums = _observed_sums(values)
    stat_sorted = np.sort(stat)
    total = len(stat_sorted)
    pvalues: dict[PairId, float] = {}
    for pair in all_pairs(values.shape[0]):
        d = abs(sums[pair.a] - sums[pair.b])
        count = total - int(np.searchsorted(stat_sorted, d, side="left"))
        pvalues[pair] = count / total
    return PValueTable(
        run_tags=run_tags,
        pvalues=pvalues,
        permutations=permutations,
        seed=seed,
        alpha_hint=alpha_hint,
    )


def randomized_tukey_hsd(
    matrix,
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    *,
    workers: int = 0,
    alpha_hint: float = DEFAULT_ALPHA,
) -> PValueTable:
    """Estimate the pairwise p-value table from B random permutations.

    Deterministic given (matrix, permutations, seed) for any worker count
    and either kernel backend.
    """
    values, run_tags = _unpack(matrix)
    m, n = values.shape
    if m < 2:
        raise ValueError("need at least 2 runs")
    if n < 1:
        raise ValueError("need at least 1 topic")
    if not np.all(np.isfinite(values)):
        raise ValueError("scores must be finite")
    if permutations < 1:
        raise ValueError("permutations must be >= 1")
    stat = max_stat_sample(values, permutations, seed, workers)
    return _table_from_stat(values, run_tags, stat, permutations, seed, alpha_hint)


def exact_tukey_hsd(matrix, *, limit: int = 10_000_000,
                    alpha_hint: float = DEFAULT_ALPHA) -> PValueTable:
    """Enumerate all (m!)^n within-topic assignments; oracle for tiny instances."""
    values, run_tags = _unpack(matrix)
    m, n = values.shape
    if m < 2:
        raise ValueError("need at least 2 runs")
    if n < 1:
        raise ValueError("need at least 1 topic")
    if not np.all(np.isfinite(values)):
        raise ValueError("scores must be finite")
    total = math.factorial(m) ** n
    if total > limit:
        raise ValueError(f"(m!)^n = {total} exceeds enumeration limit {limit}")
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.intp)
    sums = np.zeros((1, m), dtype=np.float64)
    for j in range(n):
        contrib = values[perms, j]  # (m!, m): column j under every assignment
        sums = (sums[:, None, :] + contrib[None, :, :]).reshape(-1, m)
    stat = sums.max(axis=1) - sums.min(axis=1)
    return _table_from_stat(values, run_tags, stat, total, 0, alpha_hint)


def significant_set(table: PValueTable, alpha: float) -> SignificanceSet:
    """Pairs with p strictly below alpha."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    return SignificanceSet(
        run_tags=table.run_tags,
        alpha=alpha,
        significant=frozenset(pair for pair, p in table.pvalues.items() if p < alpha),
    )


def write_pvalues_csv(table: PValueTable, path: str | os.PathLike,
                      metric: str = "", qrels: str = "") -> None:
    """Rows ``run_a,run_b,pvalue`` in canonical pair order, plus metadata."""
    for tag in table.run_tags:
        if not tag or re.search(r"\s", tag):
            raise ValueError(f"run tag {tag!r} not serializable")
    comments = [
        ("permutations", str(table.permutations)),
        ("seed", str(table.seed)),
        ("alpha_hint", repr(table.alpha_hint)),
        ("metric", metric),
        ("qrels", qrels),
        ("runs", " ".join(table.run_tags)),
    ]
    rows = (
        [table.run_tags[pair.a], table.run_tags[pair.b], repr(table.pvalues[pair])]
        for pair in table.pairs()
    )
    write_csv(path, comments, ["run_a", "run_b", "pvalue"], rows)


def read_pvalues_csv(path: str | os.PathLike) -> tuple[PValueTable, dict[str, str]]:
    """Read a p-value CSV; returns the table and its metadata block."""
    meta, header, rows = read_csv(path)
    if header != ["run_a", "run_b", "pvalue"]:
        raise ValueError(f"{os.fspath(path)}: unexpected header {header}")
    if "runs" not in meta:
        raise ValueError(f"{os.fspath(path)}: missing '# runs=' metadata")
    run_tags = tuple(meta["runs"].split())
    index = {tag: i for i, tag in enumerate(run_tags)}
    pvalues: dict[PairId, float] = {}
    for row_no, row in enumerate(rows, 2):
        if len(row) != 3:
            raise ValueError(f"{os.fspath(path)}: row {row_no} has {len(row)} fields")
        tag_a, tag_b, p_text = row
        if tag_a not in index or tag_b not in index:
            raise ValueError(f"{os.fspath(path)}: row {row_no} names unknown run")
        pair = canonical_pair(index[tag_a], index[tag_b])
        if pair in pvalues:
            raise ValueError(f"{os.fspath(path)}: duplicate pair {tag_a}/{tag_b}")
        pvalues[pair] = float(p_text)
    table = PValueTable(
        run_tags=run_tags,
        pvalues=pvalues,
        permutations=int(meta.get("permutations", "0") or "0"),
        seed=int(meta.get("seed", "0") or "0"),
        alpha_hint=float(meta.get("alpha_hint", repr(DEFAULT_ALPHA)) or DEFAULT_ALPHA),
    )
    return table, meta
