"""Report artifact writers: confusion, correlation, drops, replicates, provenance.

Every writer is byte-deterministic for identical inputs, so reruns with the
same configuration and seed produce identical files regardless of backend
or worker count.  Numbers are rendered with 10 significant digits; undefined
rates render as the literal ``NA``.
"""

from __future__ import annotations

import hashlib
import json
import os
from fractions import Fraction

from . import __version__
from ._csvio import write_csv
from .agreement import ConfusionRates
from .fairness import DropReport, FiveNumber
from .rank_corr import CorrelationReport
from .sampling import RATE_FIELDS, VALUE_FIELDS, ReplicateReport


def fmt(value: float | Fraction | None) -> str:
    if value is None:
        return "NA"
    return f"{float(value):.10g}"


def write_confusion_csv(path: str | os.PathLike, dataset: str, metric: str,
                        rates: ConfusionRates) -> None:
    write_csv(
        path,
        [],
        ["dataset", "metric", "tp", "fn", "tn", "fp", "gold_pos", "gold_neg"],
        [[
            dataset, metric,
            fmt(rates.tp_pct), fmt(rates.fn_pct), fmt(rates.tn_pct), fmt(rates.fp_pct),
            str(rates.gold_positive_count), str(rates.gold_negative_count),
        ]],
    )


def write_correlation_csv(path: str | os.PathLike, dataset: str, metric: str,
                          report: CorrelationReport) -> None:
    write_csv(
        path,
        [],
        ["dataset", "metric", "tau", "rbo", "rbo_p"],
        [[dataset, metric, fmt(report.kendall_tau), fmt(report.rbo), fmt(report.rbo_p)]],
    )


def write_drops_csv(path: str | os.PathLike, dataset: str, metric: str,
                    report: DropReport) -> None:
    rows = (
        [row.run_tag, str(row.gold_count), str(row.alt_count),
         str(row.drop), str(row.signed_delta)]
        for row in report.rows
    )
    write_csv(
        path,
        [("dataset", dataset), ("metric", metric)],
        ["run", "gold_count", "alt_count", "drop", "signed_delta"],
        rows,
    )


def write_drops_summary_csv(
    path: str | os.PathLike,
    rows: list[tuple[str, str, FiveNumber, float]],
) -> None:
    """One row per analysis scope: (dataset, metric, five-number, mean)."""
    body = (
        [dataset, metric, fmt(s.minimum), fmt(s.q1), fmt(s.median),
         fmt(s.q3), fmt(s.maximum), fmt(mean)]
        for dataset, metric, s, mean in rows
    )
    write_csv(path, [], ["dataset", "metric", "min", "q1", "median", "q3", "max", "mean"], body)


def write_replicates_csv(path: str | os.PathLike, dataset: str, metric: str,
                         report: ReplicateReport) -> None:
    """One row per iteration plus mean / stddev / excluded footer rows."""
    rows: list[list[str]] = []
    for result in report.per_iteration:
        rows.append(
            [str(result.iteration)]
            + [fmt(result.value(field)) for field in VALUE_FIELDS]
        )
    rows.append(["mean"] + [fmt(report.stats[field].mean) for field in VALUE_FIELDS])
    rows.append(["stddev"] + [fmt(report.stats[field].stddev) for field in VALUE_FIELDS])
    rows.append(["excluded"] + [str(report.stats[field].excluded) for field in VALUE_FIELDS])
    write_csv(
        path,
        [("dataset", dataset), ("metric", metric),
         ("iterations", str(len(report.per_iteration)))],
        ["iteration"] + list(VALUE_FIELDS),
        rows,
    )


def write_replicate_drops_csv(path: str | os.PathLike, dataset: str, metric: str,
                              report: ReplicateReport) -> None:
    """Per-run drops averaged across iterations: the box-plot source data."""
    rows = ([tag, fmt(mean)] for tag, mean in report.per_run_mean_drops)
    write_csv(
        path,
        [("dataset", dataset), ("metric", metric),
         ("iterations", str(len(report.per_iteration)))],
        ["run", "mean_drop"],
        rows,
    )


def render_summary(
    dataset: str,
    metric: str,
    collection_lines: list[str],
    rates: ConfusionRates,
    correlation: CorrelationReport,
    drops: DropReport,
    replicates: ReplicateReport | None,
    settings: dict[str, str],
) -> str:
    """Human-readable recap; every number equals a CSV cell (formatting only)."""
    lines: list[str] = [f"audit: {dataset}", f"metric: {metric}"]
    lines.extend(f"{key}: {value}" for key, value in settings.items())
    lines.append("")
    lines.extend(collection_lines)
    lines.append("")
    lines.append("full alternative topic set:")
    lines.append(
        f"  confusion %: TP {fmt(rates.tp_pct)}  FN {fmt(rates.fn_pct)}"
        f"  TN {fmt(rates.tn_pct)}  FP {fmt(rates.fp_pct)}"
        f"  (gold positives {rates.gold_positive_count},"
        f" negatives {rates.gold_negative_count})"
    )
    lines.append(
        f"  correlation: tau {fmt(correlation.kendall_tau)}"
        f"  rbo {fmt(correlation.rbo)} (p {fmt(correlation.rbo_p)})"
    )
    s = drops.summary
    lines.append(
        f"  drops per run: min {fmt(s.minimum)}  q1 {fmt(s.q1)}  median {fmt(s.median)}"
        f"  q3 {fmt(s.q3)}  max {fmt(s.maximum)}  mean {fmt(drops.mean)}"
    )
    if replicates is not None:
        lines.append("")
        lines.append(f"undersampled replicates ({len(replicates.per_iteration)} iterations):")
        stats = replicates.stats
        for field in RATE_FIELDS:
            st = stats[field]
            extra = f", {st.excluded} NA excluded" if st.excluded else ""
            lines.append(f"  {field}: mean {fmt(st.mean)}  sd {fmt(st.stddev)}{extra}")
        lines.append(
            f"  tau: mean {fmt(stats['tau'].mean)}  sd {fmt(stats['tau'].stddev)}"
        )
        lines.append(
            f"  rbo: mean {fmt(stats['rbo'].mean)}  sd {fmt(stats['rbo'].stddev)}"
        )
        d = replicates.drop_summary
        lines.append(
            f"  per-run mean drops: min {fmt(d.minimum)}  q1 {fmt(d.q1)}"
            f"  median {fmt(d.median)}  q3 {fmt(d.q3)}  max {fmt(d.maximum)}"
            f"  mean {fmt(replicates.drop_mean)}"
        )
    lines.append("")
    return "\n".join(lines)


def sha256_file(path: str | os.PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def input_digests(runs_dir: str, gold_qrels: str, alt_qrels: str) -> dict[str, str]:
    digests: dict[str, str] = {}
    for name in sorted(os.listdir(runs_dir)):
        full = os.path.join(runs_dir, name)
        if not name.startswith(".") and os.path.isfile(full):
            digests[f"runs/{name}"] = sha256_file(full)
    digests["gold_qrels"] = sha256_file(gold_qrels)
    digests["alt_qrels"] = sha256_file(alt_qrels)
    return digests


def write_provenance(path: str | os.PathLike, config: dict, digests: dict[str, str]) -> None:
    payload = {
        "tool": "sigaudit",
        "version": __version__,
        "config": config,
        "inputs": digests,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def check_provenance(path: str | os.PathLike, config: dict, digests: dict[str, str],
                     force: bool) -> None:
    """Refuse to mix new reports into a directory built from different inputs."""
    if force or not os.path.exists(path):
        return
    with open(path, encoding="utf-8") as handle:
        previous = json.load(handle)
    if previous.get("inputs") != digests or previous.get("config") != config:
        raise ValueError(
            f"{os.fspath(path)}: existing reports were built from different inputs"
            " or settings; rerun with --force to overwrite"
        )
