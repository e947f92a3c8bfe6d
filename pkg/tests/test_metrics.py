"""AP / NDCG metric values and score-matrix construction."""

from __future__ import annotations

import io
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _ref
from sigaudit.metrics import (
    MetricSpec,
    ScoreMatrix,
    average_precision,
    binarize,
    build_score_matrix,
    ndcg_at_k,
    quantize10,
    read_matrix_csv,
    write_matrix_csv,
)
from sigaudit.trec_io import Qrels, RankedList, Run, RunPool, parse_qrels_file


def ranked(docs):
    """RankedList placing docs in the given order via descending scores."""
    return RankedList.from_unsorted((doc, float(len(docs) - i)) for i, doc in enumerate(docs))


def qrels_from(judgments, name="g"):
    return Qrels(name=name, judgments=dict(judgments))


class TestQuantize:
    def test_idempotent(self):
        for x in (0.1, 1 / 3, 0.6696887243087331, 1e-17, 123456.789):
            once = quantize10(x)
            assert quantize10(once) == once

    def test_ten_significant_digits(self):
        assert quantize10(1 / 3) == 0.3333333333
        assert quantize10(0.0) == 0.0


class TestMetricSpec:
    def test_label_round_trip(self):
        for spec in (
            MetricSpec(kind="ap", cutoff=1000, relevance_threshold=2),
            MetricSpec(kind="ap", cutoff=10, relevance_threshold=1),
            MetricSpec(kind="ndcg", cutoff=20),
            MetricSpec(kind="ndcg", cutoff=5, exp_gain=True),
        ):
            assert MetricSpec.from_label(spec.label) == spec

    def test_validation(self):
        with pytest.raises(ValueError):
            MetricSpec(kind="precision", cutoff=10)
        with pytest.raises(ValueError):
            MetricSpec(kind="ap", cutoff=0)
        with pytest.raises(ValueError):
            MetricSpec(kind="ap", cutoff=10, relevance_threshold=0)
        with pytest.raises(ValueError):
            MetricSpec.from_label("ap1000")


class TestBinarize:
    def test_threshold_and_name(self):
        qrels = qrels_from({("t1", "d1"): 3, ("t1", "d2"): 2, ("t1", "d3"): 1}, name="gold")
        binary = binarize(qrels, 2)
        assert binary.name == "gold;rel>=2"
        assert binary.grade("t1", "d1") == 1
        assert binary.grade("t1", "d2") == 1
        assert binary.grade("t1", "d3") == 0

    def test_threshold_one_keeps_any_positive(self):
        qrels = qrels_from({("t1", "d1"): 1})
        assert binarize(qrels, 1).grade("t1", "d1") == 1


class TestAveragePrecision:
    def test_interleaved_half(self):
        # ranks 2 and 4 relevant: AP = (1/2 + 2/4) / 2 = 0.5
        qrels = qrels_from({("t", "r1"): 1, ("t", "r2"): 1})
        lst = ranked(["n1", "r1", "n2", "r2"])
        assert average_precision(lst, qrels, "t", cutoff=1000) == 0.5

    def test_perfect_ranking(self):
        qrels = qrels_from({("t", "a"): 1, ("t", "b"): 1})
        assert average_precision(ranked(["a", "b", "x"]), qrels, "t", cutoff=1000) == 1.0

    def test_nothing_relevant_retrieved(self):
        qrels = qrels_from({("t", "a"): 1})
        assert average_precision(ranked(["x", "y"]), qrels, "t", cutoff=1000) == 0.0

    def test_unretrieved_relevant_counts_in_denominator(self):
        qrels = qrels_from({("t", "a"): 1, ("t", "zzz"): 1})
        assert average_precision(ranked(["a"]), qrels, "t", cutoff=1000) == 0.5

    def test_cutoff_truncates(self):
        qrels = qrels_from({("t", "a"): 1})
        assert average_precision(ranked(["x", "a"]), qrels, "t", cutoff=1) == 0.0

    def test_no_relevant_documents_is_an_error(self):
        qrels = qrels_from({("t", "a"): 0})
        with pytest.raises(ValueError):
            average_precision(ranked(["a"]), qrels, "t", cutoff=10)


class TestNdcg:
    def test_three_doc_example_to_1e9(self):
        # retrieved grades [0, 2, 1] against judged grades {2, 1, 0}
        qrels = qrels_from({("t", "good"): 2, ("t", "ok"): 1, ("t", "bad"): 0})
        lst = ranked(["bad", "good", "ok"])
        import math

        dcg = 2 / math.log2(3) + 1 / math.log2(4)
        idcg = 2 / math.log2(2) + 1 / math.log2(3)
        want = dcg / idcg
        got = ndcg_at_k(lst, qrels, "t", k=1000)
        assert abs(got - want) < 1e-9
        assert abs(got - 0.6697) < 5e-5

    def test_ideal_ranking_is_one(self):
        qrels = qrels_from({("t", "a"): 3, ("t", "b"): 1})
        assert ndcg_at_k(ranked(["a", "b"]), qrels, "t", k=10) == 1.0

    def test_exp_gain_changes_value(self):
        qrels = qrels_from({("t", "a"): 3, ("t", "b"): 1})
        lst = ranked(["b", "a"])
        linear = ndcg_at_k(lst, qrels, "t", k=10, exp_gain=False)
        exp = ndcg_at_k(lst, qrels, "t", k=10, exp_gain=True)
        assert linear != exp
        ref = _ref.ref_ndcg(["b", "a"], {"a": 3, "b": 1}, k=10, exp_gain=True)
        assert abs(exp - ref) < 1e-12

    def test_all_zero_grades_is_an_error(self):
        qrels = qrels_from({("t", "a"): 0})
        with pytest.raises(ValueError):
            ndcg_at_k(ranked(["a"]), qrels, "t", k=10)

    def test_ideal_includes_unretrieved_documents(self):
        qrels = qrels_from({("t", "seen"): 1, ("t", "unseen"): 3})
        got = ndcg_at_k(ranked(["seen"]), qrels, "t", k=10)
        ref = _ref.ref_ndcg(["seen"], {"seen": 1, "unseen": 3}, k=10)
        assert abs(got - ref) < 1e-15
        assert got < 1.0


class TestRandomAgainstReference:
    def test_ap_and_ndcg_match_brute_force(self):
        rng = np.random.default_rng(41)
        docs = [f"d{i}" for i in range(30)]
        for case in range(10):
            grades = {d: int(g) for d, g in zip(docs, rng.integers(0, 4, len(docs)))}
            if not any(g > 0 for g in grades.values()):
                grades[docs[0]] = 2
            judged = {("t", d): g for d, g in grades.items()}
            order = list(rng.permutation(docs))[: rng.integers(5, 30)]
            cutoff = int(rng.integers(3, 25))
            qrels = qrels_from(judged)
            lst = ranked(order)

            binary = binarize(qrels, 2)
            relevant = {d for d, g in grades.items() if g >= 2}
            if relevant:
                got_ap = average_precision(lst, binary, "t", cutoff=cutoff)
                want_ap = _ref.ref_average_precision(order, relevant, cutoff)
                assert abs(got_ap - want_ap) < 1e-12, f"case {case}"

            got = ndcg_at_k(lst, qrels, "t", k=cutoff)
            want = _ref.ref_ndcg(order, grades, k=cutoff)
            assert abs(got - want) < 1e-12, f"case {case}"


def small_pool():
    lists_a = {
        "t1": ranked(["r1", "n1", "r2"]),
        "t2": ranked(["n1", "r1"]),
    }
    lists_b = {
        "t1": ranked(["n1", "r1", "r2"]),
        # sysB has no list for t2
    }
    return RunPool.from_runs([Run("sysB", lists_b), Run("sysA", lists_a)])


def small_qrels():
    text = "t1 0 r1 2\nt1 0 r2 3\nt1 0 n1 0\nt2 0 r1 2\nt3 0 n9 1\n"
    return parse_qrels_file(io.StringIO(text), name="gold", source="mem")


class TestBuildMatrix:
    def test_shape_order_and_missing_list_zero(self, ap_spec):
        matrix = build_score_matrix(small_pool(), small_qrels(), ap_spec)
        assert matrix.run_tags == ("sysA", "sysB")  # pool order = sorted tags
        # t3's only judgment is grade 1 < threshold 2: dropped
        assert matrix.topic_ids == ("t1", "t2")
        assert matrix.values.shape == (2, 2)
        assert matrix.values[1, 1] == 0.0  # sysB missing t2
        # sysA on t1: relevant at ranks 1,3 -> (1/1 + 2/3)/2
        assert abs(matrix.values[0, 0] - (1 + 2 / 3) / 2) < 1e-15

    def test_bearing_filter_warns(self, ap_spec, caplog):
        with caplog.at_level(logging.WARNING, logger="sigaudit.metrics"):
            build_score_matrix(small_pool(), small_qrels(), ap_spec)
        assert any("t3" in rec.getMessage() for rec in caplog.records)

    def test_topics_subset_and_unknown_topic(self, ap_spec):
        matrix = build_score_matrix(small_pool(), small_qrels(), ap_spec, topics=["t1"])
        assert matrix.topic_ids == ("t1",)
        with pytest.raises(ValueError):
            build_score_matrix(small_pool(), small_qrels(), ap_spec, topics=["t1", "zz"])

    def test_no_bearing_topics_is_an_error(self):
        spec = MetricSpec(kind="ap", cutoff=1000, relevance_threshold=3)
        qrels = qrels_from({("t2", "r1"): 2}, name="g")
        with pytest.raises(ValueError):
            build_score_matrix(small_pool(), qrels, spec)

    def test_ndcg_uses_graded_judgments(self):
        spec = MetricSpec(kind="ndcg", cutoff=10)
        matrix = build_score_matrix(small_pool(), small_qrels(), spec)
        assert matrix.topic_ids == ("t1", "t2", "t3")  # t3 bears grade 1 for ndcg
        assert np.all(matrix.values <= 1.0)

    def test_subset_equals_rebuild(self, ap_spec):
        full = build_score_matrix(small_pool(), small_qrels(), ap_spec)
        sliced = full.subset(["t1"])
        rebuilt = build_score_matrix(small_pool(), small_qrels(), ap_spec, topics=["t1"])
        assert sliced.topic_ids == rebuilt.topic_ids
        assert np.array_equal(sliced.values, rebuilt.values)

    def test_matrix_validation(self, ap_spec):
        with pytest.raises(ValueError):
            ScoreMatrix(
                run_tags=("a",),
                topic_ids=("t",),
                values=np.array([[1.5]]),
                metric=ap_spec,
                qrels_name="g",
            )
        with pytest.raises(ValueError):
            ScoreMatrix(
                run_tags=("a",),
                topic_ids=("t", "u"),
                values=np.zeros((1, 1)),
                metric=ap_spec,
                qrels_name="g",
            )


class TestMatrixCsv:
    def test_round_trip_after_quantize(self, tmp_path, ap_spec):
        rng = np.random.default_rng(42)
        values = rng.random((3, 4))
        matrix = ScoreMatrix(
            run_tags=("a", "b", "c"),
            topic_ids=("t1", "t2", "t3", "t4"),
            values=values,
            metric=ap_spec,
            qrels_name="gold",
        )
        path = tmp_path / "scores.csv"
        write_matrix_csv(matrix, str(path))
        loaded = read_matrix_csv(str(path))
        assert loaded.run_tags == matrix.run_tags
        assert loaded.topic_ids == matrix.topic_ids
        assert loaded.metric == ap_spec
        assert loaded.qrels_name == "gold"
        assert np.array_equal(loaded.values, matrix.quantized().values)

    def test_quantized_matrix_round_trips_exactly(self, tmp_path, ap_spec):
        rng = np.random.default_rng(43)
        matrix = ScoreMatrix(
            run_tags=("a", "b"),
            topic_ids=("t1", "t2"),
            values=rng.random((2, 2)),
            metric=ap_spec,
            qrels_name="g",
        ).quantized()
        path = tmp_path / "scores.csv"
        write_matrix_csv(matrix, str(path))
        assert np.array_equal(read_matrix_csv(str(path)).values, matrix.values)

    def test_read_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# metric=ap@10;rel>=2\nwrong,t1\na,0.5\n", encoding="utf-8")
        with pytest.raises(ValueError):
            read_matrix_csv(str(path))


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1, allow_nan=False))
def test_quantize_property(x):
    q = quantize10(x)
    assert quantize10(q) == q
    assert abs(q - x) <= 1e-9 * max(1.0, abs(x))
