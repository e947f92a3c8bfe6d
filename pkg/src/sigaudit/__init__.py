"""Audit whether alternative relevance judgments preserve significance decisions.

The package compares two sets of relevance judgments (a gold standard and an
alternative, e.g. machine-generated labels) by the pairwise statistical
significance decisions they induce over a pool of retrieval runs: which run
pairs differ significantly under a randomized Tukey HSD permutation test,
how the alternative's decisions agree with gold (confusion rates), how well
it preserves the significance ordering of pairs (Kendall tau-b, rank-biased
overlap), and which runs absorb the lost significant pairs.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .agreement import ConfusionRates, PairClassification, classify_pairs, confusion_rates
from .fairness import (
    DropReport,
    DropRow,
    FiveNumber,
    RunSignificanceCounts,
    five_number_summary,
    per_run_counts,
    per_run_drops,
    summarize_drops,
)
from .metrics import (
    MetricSpec,
    ScoreMatrix,
    average_precision,
    binarize,
    build_score_matrix,
    ndcg_at_k,
    read_matrix_csv,
    write_matrix_csv,
)
from .rank_corr import (
    DEFAULT_RBO_P,
    CorrelationReport,
    PairRanking,
    compare_rankings,
    kendall_tau,
    rank_biased_overlap,
    rank_pairs_by_pvalue,
)
from .sampling import (
    DEFAULT_ITERATIONS,
    ReplicateConfig,
    ReplicateReport,
    ReplicateResult,
    run_replicates,
    undersample_topics,
)
from .significance import (
    DEFAULT_ALPHA,
    DEFAULT_PERMUTATIONS,
    PairId,
    PValueTable,
    SignificanceSet,
    all_pairs,
    canonical_pair,
    exact_tukey_hsd,
    randomized_tukey_hsd,
    read_pvalues_csv,
    significant_set,
    write_pvalues_csv,
)
from .trec_io import (
    CollectionStats,
    ParseError,
    Qrels,
    RankedList,
    Run,
    RunPool,
    parse_qrels_file,
    parse_run_file,
    read_qrels,
    read_run,
    read_run_dir,
    validate_collection,
)

__all__ = [
    "__version__",
    "ConfusionRates",
    "PairClassification",
    "classify_pairs",
    "confusion_rates",
    "DropReport",
    "DropRow",
    "FiveNumber",
    "RunSignificanceCounts",
    "five_number_summary",
    "per_run_counts",
    "per_run_drops",
    "summarize_drops",
    "MetricSpec",
    "ScoreMatrix",
    "average_precision",
    "binarize",
    "build_score_matrix",
    "ndcg_at_k",
    "read_matrix_csv",
    "write_matrix_csv",
    "DEFAULT_RBO_P",
    "CorrelationReport",
    "PairRanking",
    "compare_rankings",
    "kendall_tau",
    "rank_biased_overlap",
    "rank_pairs_by_pvalue",
    "DEFAULT_ITERATIONS",
    "ReplicateConfig",
    "ReplicateReport",
    "ReplicateResult",
    "run_replicates",
    "undersample_topics",
    "DEFAULT_ALPHA",
    "DEFAULT_PERMUTATIONS",
    "PairId",
    "PValueTable",
    "SignificanceSet",
    "all_pairs",
    "canonical_pair",
    "exact_tukey_hsd",
    "randomized_tukey_hsd",
    "read_pvalues_csv",
    "significant_set",
    "write_pvalues_csv",
    "CollectionStats",
    "ParseError",
    "Qrels",
    "RankedList",
    "Run",
    "RunPool",
    "parse_qrels_file",
    "parse_run_file",
    "read_qrels",
    "read_run",
    "read_run_dir",
    "validate_collection",
]
