"""Shared fixtures: synthetic FACED-style and TUH-style project folders."""

from __future__ import annotations

import base64
import csv
import textwrap
from pathlib import Path

import pytest

from cardsmith.ingest import ClassLabelMap, PredictionLog, PredictionRecord

# 1x1 transparent PNG, enough to exercise image inlining
TINY_PNG = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mP8z8BQDwAEhQGAhKmMIQAAAABJRU5ErkJggg=="
)

FACED_COUNTS = [[10, 2, 1], [1, 11, 2], [0, 1, 12]]
FACED_NAMES = ("Negative", "Neutral", "Positive")
TUH_COUNTS = [[5, 1], [2, 4]]
TUH_NAMES = ("Normal", "Abnormal")

EPOCH_ROWS = [
    (1, 1.21, 1.35, 0.44, 0.41),
    (2, 0.93, 1.02, 0.58, 0.55),
    (3, 0.71, 0.88, 0.67, 0.61),
    (4, 0.55, 0.79, 0.74, 0.66),
    (5, 0.47, 0.75, 0.79, 0.68),
]


def pairs_from_counts(counts):
    """Expand a count matrix into (true, predicted) pairs, row-major."""
    pairs = []
    for t, row in enumerate(counts):
        for p, count in enumerate(row):
            pairs.extend([(t, p)] * count)
    return pairs


def log_from_counts(counts, names) -> PredictionLog:
    records = tuple(PredictionRecord(t, p) for t, p in pairs_from_counts(counts))
    return PredictionLog(records, ClassLabelMap.from_names(names))


def write_prediction_csv(path: Path, pairs, scores=None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if scores is None:
            writer.writerow(["true_label", "predicted_label"])
            writer.writerows(pairs)
        else:
            k = len(scores[0])
            writer.writerow(["true_label", "predicted_label"] + [f"score_{i}" for i in range(k)])
            for (t, p), row_scores in zip(pairs, scores):
                writer.writerow([t, p] + [repr(s) for s in row_scores])


def write_epoch_csv(path: Path, rows=EPOCH_ROWS) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "train_loss", "val_loss", "train_acc", "val_acc"])
        writer.writerows(rows)


def write_label_map(path: Path, names) -> None:
    path.write_text("".join(f"- {i}: {name}\n" for i, name in enumerate(names)), encoding="utf-8")


FACED_CONFIG = textwrap.dedent(
    """\
    overview: Classifies EEG windows into negative, neutral and positive affect and
      reports uncertainty for every metric.
    intended_use: Research benchmarking of affect decoders; not a clinical instrument.
    dataset:
      name: FACED Dataset
      num_classes: 3
      ground_truth: [Negative, Neutral, Positive]
      split: "80:20"
      preprocessing:
        - Band-Pass Filtering
        - Common Spatial Patterns (CSP)
        - Normalization
    model:
      input_desc: 30-channel EEG time-series windows
      output_desc: Class label with confidence intervals
      model_type: CNN (Xception-based)
      learning_rate: 0.001
      batch_size: 32
      parameter_count: 0.56M
    limitations:
      - Source recordings are demographically imbalanced, which may bias predictions.
      - Noisy EEG channels and missing data can degrade classification performance.
    references:
      - FACED dataset documentation
    assets:
      prediction_log: predictions.csv
      epoch_log: history.csv
      images:
        - path: montage.png
          caption: Electrode montage
    uncertainty:
      level: 0.95
      replicates: 500
      seed: 42
    """
)

TUH_CONFIG = textwrap.dedent(
    """\
    overview: Flags EEG recordings as normal or abnormal and reports uncertainty for
      every metric.
    dataset:
      name: TUH Abnormal
      num_classes: 2
      ground_truth: [Normal, Abnormal]
      split: "80:20"
      preprocessing:
        - Independent Component Analysis
        - Band-Pass Filtering
        - Normalization
    model:
      input_desc: 19-channel EEG time-series
      output_desc: Binary class label with confidence intervals
      model_type: Brain Signal Vision Transformer (BSVT)
      learning_rate: 1.0e-05
      batch_size: 32
      parameter_count: 0.75M
    limitations:
      - Long recordings require large tokenized inputs and significant memory.
    assets:
      prediction_log: predictions.csv
      epoch_log: history.csv
    uncertainty:
      level: 0.95
      replicates: 500
      seed: 42
    """
)


def make_faced_project(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    write_prediction_csv(root / "predictions.csv", pairs_from_counts(FACED_COUNTS))
    write_epoch_csv(root / "history.csv")
    (root / "montage.png").write_bytes(TINY_PNG)
    config = root / "config.yaml"
    config.write_text(FACED_CONFIG, encoding="utf-8")
    return config


def make_tuh_project(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    write_prediction_csv(root / "predictions.csv", pairs_from_counts(TUH_COUNTS))
    write_epoch_csv(root / "history.csv")
    config = root / "config.yaml"
    config.write_text(TUH_CONFIG, encoding="utf-8")
    return config


@pytest.fixture
def faced_project(tmp_path) -> Path:
    """Path to a FACED-style config inside a fully populated project folder."""
    return make_faced_project(tmp_path / "faced")


@pytest.fixture
def tuh_project(tmp_path) -> Path:
    return make_tuh_project(tmp_path / "tuh")
