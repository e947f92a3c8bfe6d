"""Command-line interface: score, tukey, agree, corr, drops, audit.

Exit codes: 0 success, 1 pipeline/validation failure, 2 usage/config error
(including missing input files).  All randomness flows from one --seed;
stage randomness is derived internally, never supplied separately.  The
worker count tunes parallelism only; outputs are bit-identical for any
value (default from SIGAUDIT_WORKERS, 0 = let the kernel decide).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass

from .agreement import ConfusionRates, classify_pairs, confusion_rates
from .fairness import DropReport, per_run_drops
from .metrics import MetricSpec, ScoreMatrix, build_score_matrix, read_matrix_csv, write_matrix_csv
from .rank_corr import DEFAULT_RBO_P, CorrelationReport, compare_rankings, rank_pairs_by_pvalue
from .reports import (
    check_provenance,
    fmt,
    input_digests,
    render_summary,
    write_confusion_csv,
    write_correlation_csv,
    write_drops_csv,
    write_drops_summary_csv,
    write_provenance,
    write_replicate_drops_csv,
    write_replicates_csv,
)
from .sampling import DEFAULT_ITERATIONS, ReplicateConfig, ReplicateReport, run_replicates
from .significance import (
    DEFAULT_ALPHA,
    DEFAULT_PERMUTATIONS,
    PValueTable,
    randomized_tukey_hsd,
    read_pvalues_csv,
    significant_set,
    write_pvalues_csv,
)
from .trec_io import CollectionStats, ParseError, read_qrels, read_run_dir, validate_collection

log = logging.getLogger(__name__)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _unit_interval(text: str) -> float:
    value = float(text)
    if not (0.0 < value < 1.0):
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def _default_workers() -> int:
    raw = os.environ.get("SIGAUDIT_WORKERS", "")
    try:
        return max(0, int(raw))
    except ValueError:
        return 0


@dataclass(frozen=True)
class ExperimentConfig:
    """Effective settings of one audit, after config-file and flag merging."""

    runs_dir: str
    gold_qrels: str
    alt_qrels: str
    metric: MetricSpec
    permutations: int = DEFAULT_PERMUTATIONS
    alpha: float = DEFAULT_ALPHA
    rbo_p: float = DEFAULT_RBO_P
    iterations: int = DEFAULT_ITERATIONS
    undersample: bool = False
    seed: int = 0
    output_dir: str = "audit-out"
    dataset: str = ""

    def echo(self) -> dict:
        return {
            "runs_dir": self.runs_dir,
            "gold_qrels": self.gold_qrels,
            "alt_qrels": self.alt_qrels,
            "metric": self.metric.label,
            "permutations": self.permutations,
            "alpha": self.alpha,
            "rbo_p": self.rbo_p,
            "iterations": self.iterations,
            "undersample": self.undersample,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "dataset": self.dataset,
        }


@dataclass(frozen=True)
class AuditReport:
    """In-memory result of one audit; files on disk mirror these fields."""

    collection: CollectionStats
    gold_table: PValueTable
    alt_table: PValueTable
    rates: ConfusionRates
    correlation: CorrelationReport
    drops: DropReport
    replicates: ReplicateReport | None
    summary_text: str


CONFIG_KEYS = {
    "runs_dir", "gold_qrels", "alt_qrels", "metric", "cutoff", "rel_threshold",
    "exp_gain", "permutations", "alpha", "rbo_p", "iterations", "undersample",
    "seed", "output_dir", "workers", "dataset",
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; # comments and blank lines skipped."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{line_no}: unknown config key {key!r}")
            values[key] = value.strip()
    return values


def _parse_bool(text: str, source: str) -> bool:
    lowered = text.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"{source}: expected a boolean, got {text!r}")


def _merge_audit_config(args: argparse.Namespace) -> tuple[ExperimentConfig, int]:
    """Config-file values fill in flags the user did not pass."""
    file_values = parse_config_file(args.config) if args.config else {}

    def pick(flag_value, key: str, convert, default):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return convert(file_values[key])
        return default

    runs_dir = pick(args.runs, "runs_dir", str, None)
    gold_qrels = pick(args.gold_qrels, "gold_qrels", str, None)
    alt_qrels = pick(args.alt_qrels, "alt_qrels", str, None)
    metric_kind = pick(args.metric, "metric", str, None)
    missing = [
        name
        for name, value in [
            ("--runs", runs_dir), ("--gold-qrels", gold_qrels),
            ("--alt-qrels", alt_qrels), ("--metric", metric_kind),
        ]
        if value is None
    ]
    if missing:
        raise UsageError(f"missing required settings: {', '.join(missing)}")
    spec = MetricSpec(
        kind=metric_kind,
        cutoff=pick(args.cutoff, "cutoff", int, 1000),
        relevance_threshold=pick(args.rel_threshold, "rel_threshold", int, 2),
        exp_gain=pick(
            args.exp_gain or None, "exp_gain",
            lambda v: _parse_bool(v, "exp_gain"), False,
        ),
    )
    undersample = pick(
        args.undersample or None, "undersample",
        lambda v: _parse_bool(v, "undersample"), False,
    )
    config = ExperimentConfig(
        runs_dir=runs_dir,
        gold_qrels=gold_qrels,
        alt_qrels=alt_qrels,
        metric=spec,
        permutations=pick(args.permutations, "permutations", int, DEFAULT_PERMUTATIONS),
        alpha=pick(args.alpha, "alpha", float, DEFAULT_ALPHA),
        rbo_p=pick(args.rbo_p, "rbo_p", float, DEFAULT_RBO_P),
        iterations=pick(args.iterations, "iterations", int, DEFAULT_ITERATIONS),
        undersample=undersample,
        seed=pick(args.seed, "seed", int, 0),
        output_dir=pick(args.out_dir, "output_dir", str, "audit-out"),
        dataset=pick(args.dataset, "dataset", str, ""),
    )
    if config.permutations < 1:
        raise UsageError("permutations must be >= 1")
    if not (0.0 < config.alpha < 1.0):
        raise UsageError("alpha must lie in (0, 1)")
    if not (0.0 < config.rbo_p < 1.0):
        raise UsageError("rbo_p must lie in (0, 1)")
    if config.iterations < 1:
        raise UsageError("iterations must be >= 1")
    if config.seed < 0:
        raise UsageError("seed must be >= 0")
    workers = pick(args.workers, "workers", int, _default_workers())
    return config, workers


class UsageError(Exception):
    """Bad flags or config values; maps to exit code 2."""


def run_audit(config: ExperimentConfig, workers: int = 0, force: bool = False) -> AuditReport:
    """End-to-end pipeline; writes all report files into config.output_dir."""
    digests = input_digests(config.runs_dir, config.gold_qrels, config.alt_qrels)
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    provenance_path = os.path.join(out, "provenance.json")
    check_provenance(provenance_path, config.echo(), digests, force)

    pool = read_run_dir(config.runs_dir)
    gold_qrels = read_qrels(config.gold_qrels)
    alt_qrels = read_qrels(config.alt_qrels)
    dataset = config.dataset or f"{gold_qrels.name}-vs-{alt_qrels.name}"
    collection = validate_collection(pool, gold_qrels)
    alt_collection = validate_collection(pool, alt_qrels)
    metric = config.metric.label

    # Matrices are quantized to CSV precision before testing, so every
    # downstream number is exactly recomputable from the emitted artifacts.
    gold_matrix = build_score_matrix(pool, gold_qrels, config.metric).quantized()
    alt_matrix = build_score_matrix(pool, alt_qrels, config.metric).quantized()
    write_matrix_csv(gold_matrix, os.path.join(out, "gold_scores.csv"))
    write_matrix_csv(alt_matrix, os.path.join(out, "alt_scores.csv"))

    gold_table = randomized_tukey_hsd(
        gold_matrix, config.permutations, config.seed,
        workers=workers, alpha_hint=config.alpha,
    )
    alt_table = randomized_tukey_hsd(
        alt_matrix, config.permutations, config.seed,
        workers=workers, alpha_hint=config.alpha,
    )
    write_pvalues_csv(gold_table, os.path.join(out, "gold_pvalues.csv"),
                      metric=metric, qrels=gold_qrels.name)
    write_pvalues_csv(alt_table, os.path.join(out, "alt_pvalues.csv"),
                      metric=metric, qrels=alt_qrels.name)

    gold_sig = significant_set(gold_table, config.alpha)
    alt_sig = significant_set(alt_table, config.alpha)
    rates = confusion_rates(classify_pairs(gold_sig, alt_sig))
    write_confusion_csv(os.path.join(out, "confusion.csv"), dataset, metric, rates)

    correlation = compare_rankings(
        rank_pairs_by_pvalue(gold_table), rank_pairs_by_pvalue(alt_table), config.rbo_p
    )
    write_correlation_csv(os.path.join(out, "correlation.csv"), dataset, metric, correlation)

    drops = per_run_drops(gold_sig, alt_sig)
    write_drops_csv(os.path.join(out, "drops.csv"), dataset, metric, drops)
    summary_rows = [(dataset, metric, drops.summary, drops.mean)]

    replicates: ReplicateReport | None = None
    if config.undersample:
        cfg = ReplicateConfig(
            iterations=config.iterations,
            seed=config.seed,
            target_size=len(gold_qrels.topics),
        )
        replicates = run_replicates(
            pool, gold_qrels, alt_qrels, config.metric, cfg,
            config.permutations, config.alpha,
            rbo_p=config.rbo_p, workers=workers,
            gold_table=gold_table, alt_matrix=alt_matrix,
        )
        write_replicates_csv(os.path.join(out, "replicates.csv"), dataset, metric, replicates)
        write_replicate_drops_csv(
            os.path.join(out, "replicate_drops.csv"), dataset, metric, replicates
        )
        summary_rows.append(
            (f"{dataset};undersampled", metric, replicates.drop_summary, replicates.drop_mean)
        )
    write_drops_summary_csv(os.path.join(out, "drops_summary.csv"), summary_rows)

    collection_lines = [
        f"runs: {collection.runs}  pairs: {collection.pairs}",
        f"gold qrels: {gold_qrels.name}  topics: {collection.topics}"
        f"  with relevant: {collection.topics_with_relevant}",
        f"alt qrels: {alt_qrels.name}  topics: {alt_collection.topics}"
        f"  with relevant: {alt_collection.topics_with_relevant}",
    ]
    settings = {
        "permutations": str(config.permutations),
        "alpha": fmt(config.alpha),
        "seed": str(config.seed),
    }
    summary_text = render_summary(
        dataset, metric, collection_lines, rates, correlation, drops, replicates, settings
    )
    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as handle:
        handle.write(summary_text)
    write_provenance(provenance_path, config.echo(), digests)
    return AuditReport(
        collection=collection,
        gold_table=gold_table,
        alt_table=alt_table,
        rates=rates,
        correlation=correlation,
        drops=drops,
        replicates=replicates,
        summary_text=summary_text,
    )


def _load_table_pair(args: argparse.Namespace) -> tuple[PValueTable, PValueTable, str, str]:
    gold_table, gold_meta = read_pvalues_csv(args.gold_pvals)
    alt_table, alt_meta = read_pvalues_csv(args.alt_pvals)
    if gold_table.run_tags != alt_table.run_tags:
        raise ValueError("p-value tables cover different run pools")
    if not args.force:
        for key in ("metric", "permutations"):
            gold_value = gold_meta.get(key, "")
            alt_value = alt_meta.get(key, "")
            if gold_value != alt_value:
                raise ValueError(
                    f"p-value tables disagree on {key} ({gold_value!r} vs {alt_value!r});"
                    " regenerate them or pass --force"
                )
    metric = gold_meta.get("metric", "")
    dataset = args.dataset or (
        f"{gold_meta.get('qrels', 'gold')}-vs-{alt_meta.get('qrels', 'alt')}"
    )
    return gold_table, alt_table, dataset, metric


def cmd_score(args: argparse.Namespace) -> int:
    pool = read_run_dir(args.runs)
    qrels = read_qrels(args.qrels)
    spec = MetricSpec(
        kind=args.metric,
        cutoff=args.cutoff if args.cutoff is not None else 1000,
        relevance_threshold=args.rel_threshold if args.rel_threshold is not None else 2,
        exp_gain=args.exp_gain,
    )
    stats = validate_collection(pool, qrels)
    matrix = build_score_matrix(pool, qrels, spec).quantized()
    write_matrix_csv(matrix, args.out)
    print(
        f"wrote {args.out}: {stats.runs} runs x {len(matrix.topic_ids)} topics"
        f" ({spec.label}, qrels {qrels.name})"
    )
    return 0


def cmd_tukey(args: argparse.Namespace) -> int:
    matrix = read_matrix_csv(args.scores)
    table = randomized_tukey_hsd(
        matrix, args.permutations, args.seed, workers=args.workers,
        alpha_hint=args.alpha,
    )
    write_pvalues_csv(table, args.out, metric=matrix.metric.label, qrels=matrix.qrels_name)
    print(
        f"wrote {args.out}: {len(table.pvalues)} pairs,"
        f" B={args.permutations}, seed={args.seed}"
    )
    return 0


def cmd_agree(args: argparse.Namespace) -> int:
    gold_table, alt_table, dataset, metric = _load_table_pair(args)
    gold_sig = significant_set(gold_table, args.alpha)
    alt_sig = significant_set(alt_table, args.alpha)
    rates = confusion_rates(classify_pairs(gold_sig, alt_sig))
    write_confusion_csv(args.out, dataset, metric, rates)
    print(
        f"{dataset}: TP {fmt(rates.tp_pct)}  FN {fmt(rates.fn_pct)}"
        f"  TN {fmt(rates.tn_pct)}  FP {fmt(rates.fp_pct)}"
        f"  (gold positives {rates.gold_positive_count},"
        f" negatives {rates.gold_negative_count})"
    )
    return 0


def cmd_corr(args: argparse.Namespace) -> int:
    gold_table, alt_table, dataset, metric = _load_table_pair(args)
    report = compare_rankings(
        rank_pairs_by_pvalue(gold_table), rank_pairs_by_pvalue(alt_table), args.rbo_p
    )
    write_correlation_csv(args.out, dataset, metric, report)
    print(
        f"{dataset}: tau {fmt(report.kendall_tau)}  rbo {fmt(report.rbo)}"
        f" (p {fmt(report.rbo_p)})"
    )
    return 0


def cmd_drops(args: argparse.Namespace) -> int:
    gold_table, alt_table, dataset, metric = _load_table_pair(args)
    gold_sig = significant_set(gold_table, args.alpha)
    alt_sig = significant_set(alt_table, args.alpha)
    report = per_run_drops(gold_sig, alt_sig)
    write_drops_csv(args.out, dataset, metric, report)
    if args.summary_out:
        write_drops_summary_csv(
            args.summary_out, [(dataset, metric, report.summary, report.mean)]
        )
    s = report.summary
    print(
        f"{dataset}: drops min {fmt(s.minimum)}  q1 {fmt(s.q1)}  median {fmt(s.median)}"
        f"  q3 {fmt(s.q3)}  max {fmt(s.maximum)}  mean {fmt(report.mean)}"
    )
    return 0


def cmd_audit(args: argparse.Namespace) -> int:
    config, workers = _merge_audit_config(args)
    report = run_audit(config, workers=workers, force=args.force)
    sys.stdout.write(report.summary_text)
    print(f"reports written to {config.output_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigaudit",
        description=(
            "Audit whether alternative relevance judgments preserve the pairwise"
            " statistical-significance decisions of a gold qrels set."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", help="score runs against qrels into a matrix CSV")
    score.add_argument("--runs", required=True, help="directory of TREC run files")
    score.add_argument("--qrels", required=True, help="qrels file")
    score.add_argument("--metric", required=True, choices=["ap", "ndcg"])
    score.add_argument("--cutoff", type=_positive_int, default=None)
    score.add_argument("--rel-threshold", type=_positive_int, default=None,
                       help="AP binarization grade (default 2)")
    score.add_argument("--exp-gain", action="store_true",
                       help="NDCG gain 2^grade - 1 instead of linear")
    score.add_argument("--out", required=True, help="output score CSV")
    score.set_defaults(func=cmd_score)

    tukey = sub.add_parser("tukey", help="pairwise randomized Tukey HSD p-values")
    tukey.add_argument("--scores", required=True, help="score matrix CSV")
    tukey.add_argument("--permutations", type=_positive_int, default=DEFAULT_PERMUTATIONS)
    tukey.add_argument("--seed", type=_nonneg_int, default=0)
    tukey.add_argument("--alpha", type=_unit_interval, default=DEFAULT_ALPHA,
                       help="recorded as a hint alongside the table")
    tukey.add_argument("--workers", type=_nonneg_int, default=_default_workers())
    tukey.add_argument("--out", required=True, help="output p-value CSV")
    tukey.set_defaults(func=cmd_tukey)

    def add_pair_flags(cmd: argparse.ArgumentParser) -> None:
        cmd.add_argument("--gold-pvals", required=True, help="gold p-value CSV")
        cmd.add_argument("--alt-pvals", required=True, help="alternative p-value CSV")
        cmd.add_argument("--dataset", default="", help="label for report rows")
        cmd.add_argument("--force", action="store_true",
                         help="proceed despite mismatched table metadata")

    agree = sub.add_parser("agree", help="confusion rates of significance decisions")
    add_pair_flags(agree)
    agree.add_argument("--alpha", type=_unit_interval, default=DEFAULT_ALPHA)
    agree.add_argument("--out", required=True, help="output confusion CSV")
    agree.set_defaults(func=cmd_agree)

    corr = sub.add_parser("corr", help="rank correlation of p-value orderings")
    add_pair_flags(corr)
    corr.add_argument("--rbo-p", type=_unit_interval, default=DEFAULT_RBO_P)
    corr.add_argument("--out", required=True, help="output correlation CSV")
    corr.set_defaults(func=cmd_corr)

    drops = sub.add_parser("drops", help="per-run lost-significance counts")
    add_pair_flags(drops)
    drops.add_argument("--alpha", type=_unit_interval, default=DEFAULT_ALPHA)
    drops.add_argument("--out", required=True, help="output per-run drops CSV")
    drops.add_argument("--summary-out", default="", help="optional summary CSV")
    drops.set_defaults(func=cmd_drops)

    audit = sub.add_parser("audit", help="run the full audit pipeline")
    audit.add_argument("--config", default="", help="flat key = value config file")
    audit.add_argument("--runs", default=None, help="directory of TREC run files")
    audit.add_argument("--gold-qrels", default=None)
    audit.add_argument("--alt-qrels", default=None)
    audit.add_argument("--metric", default=None, choices=["ap", "ndcg"])
    audit.add_argument("--cutoff", type=_positive_int, default=None)
    audit.add_argument("--rel-threshold", type=_positive_int, default=None)
    audit.add_argument("--exp-gain", action="store_true", default=False)
    audit.add_argument("--permutations", type=_positive_int, default=None)
    audit.add_argument("--alpha", type=_unit_interval, default=None)
    audit.add_argument("--rbo-p", type=_unit_interval, default=None)
    audit.add_argument("--iterations", type=_positive_int, default=None)
    audit.add_argument("--undersample", action="store_true", default=False)
    audit.add_argument("--seed", type=_nonneg_int, default=None)
    audit.add_argument("--out-dir", default=None)
    audit.add_argument("--dataset", default=None)
    audit.add_argument("--workers", type=_nonneg_int, default=None)
    audit.add_argument("--force", action="store_true",
                       help="overwrite reports from different inputs")
    audit.set_defaults(func=cmd_audit)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NotADirectoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
