"""Shared fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from sigaudit.metrics import MetricSpec, ScoreMatrix


def make_matrix(values, run_tags=None, topic_ids=None, metric="ap@1000;rel>=2", qrels_name="gold"):
    """Wrap a 2-D array in a ScoreMatrix with generated labels."""
    values = np.asarray(values, dtype=np.float64)
    m, n = values.shape
    if run_tags is None:
        run_tags = tuple(f"run{i}" for i in range(m))
    if topic_ids is None:
        topic_ids = tuple(f"t{j:03d}" for j in range(n))
    return ScoreMatrix(
        run_tags=tuple(run_tags),
        topic_ids=tuple(topic_ids),
        values=values,
        metric=MetricSpec.from_label(metric) if isinstance(metric, str) else metric,
        qrels_name=qrels_name,
    )


@pytest.fixture
def corpus(tmp_path):
    """Synthetic runs dir + gold/alt qrels over six topics, alt == gold."""
    import _ref

    topics = [f"t{i:02d}" for i in range(6)]
    return _ref.write_corpus(str(tmp_path), topics)


@pytest.fixture
def ap_spec():
    return MetricSpec(kind="ap", cutoff=1000, relevance_threshold=2)
