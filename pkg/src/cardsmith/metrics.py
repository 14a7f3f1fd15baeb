"""Confusion matrix and the point-estimate metrics reported on a card.

Conventions, fixed once for the whole pipeline:

* rows of the confusion matrix index true labels, columns predicted labels;
* precision/recall with an empty denominator are 0.0 with an explicit
  degeneracy flag (never NaN), and f1 is 0.0 when precision + recall == 0;
* macro averages are plain unweighted means over classes;
* micro aggregates come from pooled per-class counts, which for single-label
  input makes micro precision = recall = f1 = accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMatrix
from .ingest import ClassLabelMap, PredictionLog

# Canonical metric name order used by CI reports, charts and diffs:
# accuracy, macro P/R/F1, then per-class P/R/F1 in label order.
_MACRO_NAMES = ("macro_precision", "macro_recall", "macro_f1")


def metric_names(k: int) -> list[str]:
    names = ["accuracy", *_MACRO_NAMES]
    for i in range(k):
        names += [f"class_{i}_precision", f"class_{i}_recall", f"class_{i}_f1"]
    return names


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (K, K) int64, true x predicted
    label_map: ClassLabelMap

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def k(self) -> int:
        return self.label_map.k


@dataclass(frozen=True)
class PerClassStats:
    class_index: int
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    degenerate_precision: bool
    degenerate_recall: bool


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    per_class: tuple[PerClassStats, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float

    def value(self, name: str) -> float:
        """Look up a metric by its canonical name (see metric_names)."""
        if name == "accuracy":
            return self.accuracy
        if name in _MACRO_NAMES:
            return getattr(self, name)
        parts = name.split("_", 2)
        if len(parts) == 3 and parts[0] == "class" and parts[1].isdigit():
            idx = int(parts[1])
            if idx < len(self.per_class) and parts[2] in ("precision", "recall", "f1"):
                return getattr(self.per_class[idx], parts[2])
        raise KeyError(name)


def build_confusion_matrix(log: PredictionLog) -> ConfusionMatrix:
    """Tally (true, predicted) pairs into a K x K count matrix."""
    k = log.label_map.k
    t = np.fromiter((r.true_label for r in log.records), dtype=np.int64, count=len(log.records))
    p = np.fromiter((r.predicted_label for r in log.records), dtype=np.int64, count=len(log.records))
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts, log.label_map)


def merge_matrices(a: ConfusionMatrix, b: ConfusionMatrix) -> ConfusionMatrix:
    if a.label_map != b.label_map:
        raise ValueError("cannot merge matrices over different label maps")
    return ConfusionMatrix(a.counts + b.counts, a.label_map)


def _safe_ratio(num: int, den: int) -> tuple[float, bool]:
    if den == 0:
        return 0.0, True
    return num / den, False


def derive_metrics(cm: ConfusionMatrix) -> MetricSet:
    """Derive accuracy plus per-class/macro/micro precision, recall and F1."""
    n = cm.n
    if n == 0:
        raise EmptyMatrix("confusion matrix has no observations")

    counts = cm.counts
    row_sums = counts.sum(axis=1)
    col_sums = counts.sum(axis=0)
    diag = np.diag(counts)

    per_class = []
    for i in range(cm.k):
        tp = int(diag[i])
        fp = int(col_sums[i]) - tp
        fn = int(row_sums[i]) - tp
        tn = n - tp - fp - fn
        precision, degen_p = _safe_ratio(tp, tp + fp)
        recall, degen_r = _safe_ratio(tp, tp + fn)
        f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
        per_class.append(
            PerClassStats(i, tp, fp, fn, tn, precision, recall, f1, degen_p, degen_r)
        )

    accuracy = int(diag.sum()) / n
    macro_p = sum(c.precision for c in per_class) / cm.k
    macro_r = sum(c.recall for c in per_class) / cm.k
    macro_f1 = sum(c.f1 for c in per_class) / cm.k

    # pooled counts; fp and fn pools are equal for single-label input
    tp_pool = sum(c.tp for c in per_class)
    fp_pool = sum(c.fp for c in per_class)
    fn_pool = sum(c.fn for c in per_class)
    micro_p, _ = _safe_ratio(tp_pool, tp_pool + fp_pool)
    micro_r, _ = _safe_ratio(tp_pool, tp_pool + fn_pool)
    micro_f1 = 0.0 if micro_p + micro_r == 0.0 else 2 * micro_p * micro_r / (micro_p + micro_r)

    return MetricSet(
        accuracy=accuracy,
        per_class=tuple(per_class),
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=micro_f1,
    )


def metrics_document(cm: ConfusionMatrix, ms: MetricSet) -> dict:
    """JSON-ready document with a stable key order (see docs/metrics-schema.md)."""
    return {
        "n": cm.n,
        "labels": list(cm.label_map.names),
        "confusion_matrix": cm.counts.tolist(),
        "accuracy": ms.accuracy,
        "macro_precision": ms.macro_precision,
        "macro_recall": ms.macro_recall,
        "macro_f1": ms.macro_f1,
        "micro_precision": ms.micro_precision,
        "micro_recall": ms.micro_recall,
        "micro_f1": ms.micro_f1,
        "per_class": [
            {
                "class_index": c.class_index,
                "label": cm.label_map.names[c.class_index],
                "tp": c.tp,
                "fp": c.fp,
                "fn": c.fn,
                "tn": c.tn,
                "precision": c.precision,
                "recall": c.recall,
                "f1": c.f1,
                "degenerate_precision": c.degenerate_precision,
                "degenerate_recall": c.degenerate_recall,
            }
            for c in ms.per_class
        ],
    }
