import random

import numpy as np
import pytest

from cardsmith.errors import EmptyMatrix
from cardsmith.ingest import ClassLabelMap, PredictionLog, PredictionRecord
from cardsmith.metrics import (
    ConfusionMatrix,
    build_confusion_matrix,
    derive_metrics,
    merge_matrices,
    metric_names,
    metrics_document,
)
from conftest import log_from_counts


def random_log(rng: random.Random, n: int, k: int) -> PredictionLog:
    names = [f"c{i}" for i in range(k)]
    records = tuple(
        PredictionRecord(rng.randrange(k), rng.randrange(k)) for _ in range(n)
    )
    return PredictionLog(records, ClassLabelMap.from_names(names))


# --- independent oracle: plain-python record scan, no matrices ---------------

def oracle_counts(log: PredictionLog):
    k = log.label_map.k
    counts = [[0] * k for _ in range(k)]
    for rec in log.records:
        counts[rec.true_label][rec.predicted_label] += 1
    return counts


def oracle_metrics(log: PredictionLog):
    k = log.label_map.k
    n = len(log.records)
    per_class = []
    for i in range(k):
        tp = sum(1 for r in log.records if r.true_label == i and r.predicted_label == i)
        fp = sum(1 for r in log.records if r.true_label != i and r.predicted_label == i)
        fn = sum(1 for r in log.records if r.true_label == i and r.predicted_label != i)
        tn = n - tp - fp - fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class.append((tp, fp, fn, tn, precision, recall, f1))
    accuracy = sum(1 for r in log.records if r.true_label == r.predicted_label) / n
    macro = tuple(sum(c[j] for c in per_class) / k for j in (4, 5, 6))
    return accuracy, per_class, macro


class TestBuildConfusionMatrix:
    def test_identity(self):
        cm = build_confusion_matrix(log_from_counts([[1, 0, 0], [0, 1, 0], [0, 0, 1]], ("a", "b", "c")))
        assert np.array_equal(cm.counts, np.eye(3, dtype=np.int64))

    def test_direct_counting(self):
        cm = build_confusion_matrix(log_from_counts([[5, 1], [2, 4]], ("n", "p")))
        assert cm.counts.tolist() == [[5, 1], [2, 4]]
        assert cm.n == 12

    def test_matches_bruteforce_tally(self):
        rng = random.Random(1234)
        log = random_log(rng, 50, 5)
        cm = build_confusion_matrix(log)
        assert cm.counts.tolist() == oracle_counts(log)

    def test_merge_is_entrywise_sum(self):
        names = ("a", "b", "c")
        log_a = log_from_counts([[3, 1, 0], [0, 2, 1], [1, 0, 4]], names)
        log_b = log_from_counts([[1, 0, 2], [2, 2, 0], [0, 1, 1]], names)
        merged_log = PredictionLog(log_a.records + log_b.records, log_a.label_map)
        merged = build_confusion_matrix(merged_log)
        summed = merge_matrices(build_confusion_matrix(log_a), build_confusion_matrix(log_b))
        assert np.array_equal(merged.counts, summed.counts)


class TestDeriveMetrics:
    def test_perfect_classifier(self):
        ms = derive_metrics(build_confusion_matrix(log_from_counts([[1, 0, 0], [0, 1, 0], [0, 0, 1]], ("a", "b", "c"))))
        assert ms.accuracy == 1.0
        assert all(c.precision == c.recall == c.f1 == 1.0 for c in ms.per_class)
        assert ms.macro_f1 == 1.0

    def test_fixture_values(self):
        ms = derive_metrics(build_confusion_matrix(log_from_counts([[5, 1], [2, 4]], ("n", "p"))))
        assert ms.accuracy == pytest.approx(9 / 12, abs=0)
        c0 = ms.per_class[0]
        assert c0.precision == pytest.approx(5 / 7, rel=1e-15)
        assert c0.recall == pytest.approx(5 / 6, rel=1e-15)
        assert c0.f1 == pytest.approx(50 / 65, rel=1e-12)

    def test_degenerate_class_never_predicted(self):
        ms = derive_metrics(build_confusion_matrix(log_from_counts([[3, 0], [2, 0]], ("n", "p"))))
        c1 = ms.per_class[1]
        assert c1.precision == 0.0 and c1.degenerate_precision
        assert c1.recall == 0.0 and not c1.degenerate_recall

    def test_empty_matrix(self):
        cm = ConfusionMatrix(np.zeros((2, 2), dtype=np.int64), ClassLabelMap.from_names(["a", "b"]))
        with pytest.raises(EmptyMatrix):
            derive_metrics(cm)

    def test_oracle_equivalence_random_logs(self):
        rng = random.Random(20250810)
        for _ in range(200):
            n = rng.randint(1, 50)
            k = rng.randint(2, 5)
            log = random_log(rng, n, k)
            cm = build_confusion_matrix(log)
            assert cm.counts.tolist() == oracle_counts(log)
            ms = derive_metrics(cm)
            accuracy, per_class, macro = oracle_metrics(log)
            assert abs(ms.accuracy - accuracy) < 1e-12
            for got, want in zip(ms.per_class, per_class):
                assert (got.tp, got.fp, got.fn, got.tn) == want[:4]
                assert abs(got.precision - want[4]) < 1e-12
                assert abs(got.recall - want[5]) < 1e-12
                assert abs(got.f1 - want[6]) < 1e-12
            assert abs(ms.macro_precision - macro[0]) < 1e-12
            assert abs(ms.macro_recall - macro[1]) < 1e-12
            assert abs(ms.macro_f1 - macro[2]) < 1e-12

    def test_micro_equals_accuracy(self):
        rng = random.Random(99)
        for _ in range(20):
            log = random_log(rng, rng.randint(1, 40), rng.randint(2, 5))
            ms = derive_metrics(build_confusion_matrix(log))
            assert ms.micro_precision == ms.accuracy
            assert ms.micro_recall == ms.accuracy
            assert ms.micro_f1 == pytest.approx(ms.accuracy, rel=1e-15)

    def test_macro_f1_between_min_and_max(self):
        rng = random.Random(5)
        for _ in range(20):
            log = random_log(rng, rng.randint(2, 40), rng.randint(2, 5))
            ms = derive_metrics(build_confusion_matrix(log))
            f1s = [c.f1 for c in ms.per_class]
            assert min(f1s) <= ms.macro_f1 <= max(f1s)

    def test_per_class_counts_sum_to_n(self):
        log = log_from_counts([[5, 1], [2, 4]], ("n", "p"))
        ms = derive_metrics(build_confusion_matrix(log))
        for c in ms.per_class:
            assert c.tp + c.fp + c.fn + c.tn == 12

    def test_permutation_equivariance(self):
        rng = random.Random(31)
        log = random_log(rng, 40, 4)
        ms = derive_metrics(build_confusion_matrix(log))
        perm = [2, 0, 3, 1]  # new label = perm[old label]
        permuted = PredictionLog(
            tuple(
                PredictionRecord(perm[r.true_label], perm[r.predicted_label])
                for r in log.records
            ),
            log.label_map,
        )
        ms_p = derive_metrics(build_confusion_matrix(permuted))
        assert ms_p.accuracy == ms.accuracy
        assert ms_p.macro_f1 == pytest.approx(ms.macro_f1, rel=1e-15)
        assert ms_p.micro_f1 == pytest.approx(ms.micro_f1, rel=1e-15)
        for old, cls in enumerate(ms.per_class):
            moved = ms_p.per_class[perm[old]]
            assert (moved.tp, moved.fp, moved.fn, moved.tn) == (cls.tp, cls.fp, cls.fn, cls.tn)
            assert moved.f1 == pytest.approx(cls.f1, rel=1e-15)


def test_metric_names_layout():
    names = metric_names(2)
    assert names == [
        "accuracy", "macro_precision", "macro_recall", "macro_f1",
        "class_0_precision", "class_0_recall", "class_0_f1",
        "class_1_precision", "class_1_recall", "class_1_f1",
    ]


def test_metrics_document_shape():
    cm = build_confusion_matrix(log_from_counts([[5, 1], [2, 4]], ("n", "p")))
    doc = metrics_document(cm, derive_metrics(cm))
    assert doc["n"] == 12
    assert doc["confusion_matrix"] == [[5, 1], [2, 4]]
    assert list(doc)[:4] == ["n", "labels", "confusion_matrix", "accuracy"]
    assert doc["per_class"][0]["label"] == "n"
