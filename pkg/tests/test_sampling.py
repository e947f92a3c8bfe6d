"""Topic undersampling and replicate averaging."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_matrix
from sigaudit.metrics import MetricSpec, build_score_matrix
from sigaudit.sampling import (
    RATE_FIELDS,
    VALUE_FIELDS,
    ReplicateConfig,
    run_replicates,
    undersample_topics,
)
from sigaudit.significance import PValueTable, all_pairs, randomized_tukey_hsd
from sigaudit.trec_io import Qrels, read_qrels, read_run_dir

TOPICS = [f"t{i:02d}" for i in range(8)]


class TestUndersample:
    def test_deterministic_pure_function(self):
        a = undersample_topics(TOPICS, 3, seed=5, iteration=2)
        b = undersample_topics(reversed(TOPICS), 3, seed=5, iteration=2)
        assert a == b
        assert len(a) == 3
        assert a <= set(TOPICS)

    def test_iterations_and_seeds_vary_samples(self):
        draws = {frozenset(undersample_topics(TOPICS, 3, seed=5, iteration=i)) for i in range(20)}
        assert len(draws) > 1
        other = undersample_topics(TOPICS, 3, seed=6, iteration=0)
        base = undersample_topics(TOPICS, 3, seed=5, iteration=0)
        assert isinstance(other, set) and isinstance(base, set)

    def test_full_size_returns_everything(self):
        assert undersample_topics(TOPICS, len(TOPICS), seed=0, iteration=0) == set(TOPICS)

    def test_validation(self):
        with pytest.raises(ValueError):
            undersample_topics(TOPICS, 0, seed=0, iteration=0)
        with pytest.raises(ValueError):
            undersample_topics(TOPICS, len(TOPICS) + 1, seed=0, iteration=0)
        with pytest.raises(ValueError):
            undersample_topics(TOPICS, 2, seed=0, iteration=-1)

    def test_single_draw_frequencies_are_uniform(self):
        # 9000 draws of 1 topic from 3: expect ~3000 each; 5 sigma band
        topics = ["a", "b", "c"]
        counts = {t: 0 for t in topics}
        for i in range(9000):
            (pick,) = undersample_topics(topics, 1, seed=11, iteration=i)
            counts[pick] += 1
        sigma = (9000 * (1 / 3) * (2 / 3)) ** 0.5
        for t in topics:
            assert abs(counts[t] - 3000) < 5 * sigma

    def test_pair_frequencies_are_uniform(self):
        # all 2-subsets of 4 topics should appear equally often
        topics = ["a", "b", "c", "d"]
        counts: dict[frozenset, int] = {}
        trials = 6000
        for i in range(trials):
            s = frozenset(undersample_topics(topics, 2, seed=12, iteration=i))
            counts[s] = counts.get(s, 0) + 1
        assert len(counts) == 6
        expect = trials / 6
        sigma = (trials * (1 / 6) * (5 / 6)) ** 0.5
        for n in counts.values():
            assert abs(n - expect) < 5 * sigma


class TestReplicateConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ReplicateConfig(iterations=0, seed=1, target_size=5)
        with pytest.raises(ValueError):
            ReplicateConfig(iterations=5, seed=1, target_size=0)


def full_pipeline_inputs(corpus):
    pool = read_run_dir(corpus["runs"])
    gold = read_qrels(corpus["gold"])
    alt = read_qrels(corpus["alt"])
    spec = MetricSpec(kind="ap", cutoff=1000, relevance_threshold=2)
    return pool, gold, alt, spec


class TestRunReplicates:
    def test_identity_audit_is_exact(self, corpus):
        pool, gold, alt, spec = full_pipeline_inputs(corpus)
        cfg = ReplicateConfig(iterations=5, seed=42, target_size=len(gold.topics))
        report = run_replicates(pool, gold, alt, spec, cfg, permutations=1500, alpha=0.05)
        assert len(report.per_iteration) == 5
        for result in report.per_iteration:
            assert result.value("tau") == 1.0
            assert result.value("rbo") == 1.0
            assert result.drops.total_drops == 0
            assert result.rates.fn == 0 and result.rates.fp == 0
        assert report.stats["tau"].mean == 1.0
        assert report.stats["rbo"].mean == 1.0
        assert report.stats["mean_drop"].mean == 0.0
        assert report.drop_mean == 0.0
        # the synthetic corpus makes both decision classes non-empty
        rates = report.per_iteration[0].rates
        assert rates.gold_positive_count > 0 and rates.gold_negative_count > 0
        assert report.stats["tp_pct"].mean == 100.0
        assert report.stats["tn_pct"].mean == 100.0

    def test_undersampled_replicates_vary_and_average(self, tmp_path):
        import _ref

        topics = [f"t{i:02d}" for i in range(12)]
        corpus = _ref.write_corpus(
            str(tmp_path), topics, gold_topics=topics[:6], alt_topics=topics
        )
        pool, gold, alt, spec = full_pipeline_inputs(corpus)
        cfg = ReplicateConfig(iterations=6, seed=7, target_size=len(gold.topics))
        report = run_replicates(pool, gold, alt, spec, cfg, permutations=800, alpha=0.05)
        subsets = {result.topic_ids for result in report.per_iteration}
        assert len(subsets) > 1  # sampling actually varies
        for result in report.per_iteration:
            assert len(result.topic_ids) == 6
        for field in VALUE_FIELDS:
            stats = report.stats[field]
            if stats.mean is not None and stats.stddev is not None:
                assert stats.stddev >= 0.0
        tags = [tag for tag, _ in report.per_run_mean_drops]
        assert tags == sorted(tags)

    def test_injected_gold_table_and_matrix_short_circuit(self, corpus):
        pool, gold, alt, spec = full_pipeline_inputs(corpus)
        gold_matrix = build_score_matrix(pool, gold, spec).quantized()
        gold_table = randomized_tukey_hsd(gold_matrix, 1200, seed=3, alpha_hint=0.05)
        alt_matrix = build_score_matrix(pool, alt, spec).quantized()
        cfg = ReplicateConfig(iterations=2, seed=3, target_size=len(gold.topics))
        direct = run_replicates(
            pool, gold, alt, spec, cfg, permutations=1200, alpha=0.05,
            gold_table=gold_table, alt_matrix=alt_matrix,
        )
        for result in direct.per_iteration:
            assert result.value("tau") == 1.0  # same matrices, same master seed

    def test_rate_na_excluded_from_stats(self):
        # inject a gold table where every pair is significant: the gold
        # negative class is empty, so tn/fp rates are NA in all iterations
        tags = ("run0", "run1", "run2")
        gold_table = PValueTable(
            run_tags=tags,
            pvalues={pair: 0.01 * i for i, pair in enumerate(all_pairs(3))},
            permutations=100,
            seed=0,
        )
        rng = np.random.default_rng(8)
        alt_matrix = make_matrix(rng.random((3, 6)), run_tags=tags)
        alt_qrels = Qrels(
            name="alt",
            judgments={(t, "d1"): 2 for t in alt_matrix.topic_ids},
        )
        cfg = ReplicateConfig(iterations=3, seed=1, target_size=4)
        report = run_replicates(
            None, None, alt_qrels, alt_matrix.metric, cfg, permutations=200, alpha=0.05,
            gold_table=gold_table, alt_matrix=alt_matrix,
        )
        assert report.stats["tn_pct"].mean is None
        assert report.stats["tn_pct"].excluded == 3
        assert report.stats["fp_pct"].excluded == 3
        assert report.stats["tp_pct"].excluded == 0

    def test_single_iteration_has_no_stddev(self, corpus):
        pool, gold, alt, spec = full_pipeline_inputs(corpus)
        cfg = ReplicateConfig(iterations=1, seed=0, target_size=len(gold.topics))
        report = run_replicates(pool, gold, alt, spec, cfg, permutations=400, alpha=0.05)
        assert report.stats["tau"].stddev is None

    def test_target_size_exceeding_alt_topics_rejected(self, corpus):
        pool, gold, alt, spec = full_pipeline_inputs(corpus)
        cfg = ReplicateConfig(iterations=2, seed=0, target_size=len(alt.topics) + 1)
        with pytest.raises(ValueError):
            run_replicates(pool, gold, alt, spec, cfg, permutations=100, alpha=0.05)

    def test_sample_missing_all_bearing_topics_aborts(self):
        # alternative judgments cover tA and tB but only tA bears relevance,
        # so a sampled subset {tB} cannot be scored
        tags = ("run0", "run1", "run2")
        gold_table = PValueTable(
            run_tags=tags,
            pvalues={pair: 0.1 * (i + 1) for i, pair in enumerate(all_pairs(3))},
            permutations=100,
            seed=0,
        )
        alt_matrix = make_matrix(
            np.array([[0.9], [0.5], [0.1]]), run_tags=tags, topic_ids=("tA",)
        )
        alt_qrels = Qrels(
            name="alt", judgments={("tA", "d1"): 2, ("tB", "d1"): 0}
        )
        # find a seed whose first sample is {tB} so the abort is immediate
        bad_seed = None
        for seed in range(50):
            if undersample_topics(alt_qrels.topics, 1, seed=seed, iteration=0) == {"tB"}:
                bad_seed = seed
                break
        assert bad_seed is not None
        cfg = ReplicateConfig(iterations=1, seed=bad_seed, target_size=1)
        with pytest.raises(ValueError, match="no relevant-bearing topics"):
            run_replicates(
                None, None, alt_qrels, alt_matrix.metric, cfg, permutations=100, alpha=0.05,
                gold_table=gold_table, alt_matrix=alt_matrix,
            )

    def test_rate_fields_cover_confusion_vocabulary(self):
        assert set(RATE_FIELDS) == {"tp_pct", "fn_pct", "tn_pct", "fp_pct"}
        assert set(VALUE_FIELDS) - set(RATE_FIELDS) == {"tau", "rbo", "mean_drop"}
