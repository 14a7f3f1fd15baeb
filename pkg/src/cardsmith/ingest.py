"""Parsers for the run artifacts a training pipeline drops into its log folder.

Two CSV schemas are canonical and bit-exact:

* prediction log ``true_label,predicted_label`` or
  ``true_label,predicted_label,score_0,...,score_{K-1}``
* epoch log      ``epoch,train_loss,val_loss,train_acc,val_acc``

UTF-8, LF or CRLF line endings, no quoting. Everything here is a pure
function over immutable inputs; no shared state.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import (
    ArgmaxMismatch,
    EmptyLog,
    MalformedHeader,
    MalformedRow,
    MissingFile,
    MissingFolder,
    NonMonotonicEpochs,
    PermissionDenied,
    UnknownLabel,
    ValueOutOfRange,
)

logger = logging.getLogger(__name__)

_IMAGE_EXTS = {".svg", ".png"}
_LOG_EXTS = {".csv"}

EPOCH_HEADER = ["epoch", "train_loss", "val_loss", "train_acc", "val_acc"]


@dataclass(frozen=True)
class ClassLabelMap:
    """Ordered class names; position == class index."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) < 2:
            raise ValueError("label map needs at least 2 classes")
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")
        if any(not n for n in self.names):
            raise ValueError("class names must be non-empty")

    @property
    def k(self) -> int:
        return len(self.names)

    @classmethod
    def from_names(cls, names) -> "ClassLabelMap":
        return cls(tuple(str(n) for n in names))

    @classmethod
    def from_pairs(cls, pairs) -> "ClassLabelMap":
        """Build from (index, name) pairs; indices must be exactly 0..K-1."""
        by_index = {}
        for idx, name in pairs:
            if not isinstance(idx, int) or idx < 0:
                raise ValueError(f"label index must be a non-negative integer, got {idx!r}")
            if idx in by_index:
                raise ValueError(f"duplicate label index {idx}")
            by_index[idx] = str(name)
        expected = set(range(len(by_index)))
        if set(by_index) != expected:
            raise ValueError(f"label indices must be contiguous 0..{len(by_index) - 1}")
        return cls(tuple(by_index[i] for i in sorted(by_index)))


@dataclass(frozen=True)
class PredictionRecord:
    true_label: int
    predicted_label: int
    scores: tuple[float, ...] | None = None


@dataclass(frozen=True)
class PredictionLog:
    records: tuple[PredictionRecord, ...]
    label_map: ClassLabelMap
    source_path: str = ""

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    train_acc: float
    val_acc: float


@dataclass(frozen=True)
class AssetFolder:
    root: Path
    images: tuple[Path, ...] = ()
    logs: tuple[Path, ...] = ()


def load_label_map(path) -> ClassLabelMap:
    """Read a YAML label map: a list of single-entry ``index: name`` mappings."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"label map file not found: {path}")
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise MalformedHeader(f"label map must be a YAML list of 'index: name' pairs: {path}")
    pairs = []
    for item in data:
        if not isinstance(item, dict) or len(item) != 1:
            raise MalformedHeader(f"label map entries must be single 'index: name' pairs: {path}")
        ((idx, name),) = item.items()
        pairs.append((idx, name))
    try:
        return ClassLabelMap.from_pairs(pairs)
    except ValueError as exc:
        raise MalformedHeader(f"invalid label map {path}: {exc}") from exc


def _read_rows(path: Path) -> list[list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise MissingFile(f"cannot read {path}: {exc}") from exc


def parse_prediction_log(
    path, label_map: ClassLabelMap, scores_are_probabilities: bool = False
) -> PredictionLog:
    """Parse a prediction-log CSV against a fixed label map.

    Row order is preserved. When score columns are present, the predicted
    label must equal the argmax of the scores (ties broken toward the lowest
    class index); any mismatch is a hard error. ``scores_are_probabilities``
    additionally enforces each score in [0, 1] and row sums within 1e-6 of 1.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"prediction log not found: {path}")

    rows = _read_rows(path)
    if not rows:
        raise MalformedHeader(f"{path}: empty file, expected a header row")

    k = label_map.k
    plain = ["true_label", "predicted_label"]
    scored = plain + [f"score_{i}" for i in range(k)]
    header = rows[0]
    if header == plain:
        has_scores = False
    elif header == scored:
        has_scores = True
    else:
        raise MalformedHeader(
            f"{path}: header {','.join(header)!r} does not match "
            f"{','.join(plain)!r} or {','.join(scored)!r}"
        )

    records = []
    for rownum, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise MalformedRow(f"{path} row {rownum}: expected {len(header)} fields, got {len(row)}")
        try:
            t = int(row[0])
            p = int(row[1])
        except ValueError as exc:
            raise MalformedRow(f"{path} row {rownum}: non-integer label: {exc}") from exc
        if not 0 <= t < k:
            raise UnknownLabel(f"{path} row {rownum}: true_label {t} outside [0, {k})")
        if not 0 <= p < k:
            raise UnknownLabel(f"{path} row {rownum}: predicted_label {p} outside [0, {k})")

        scores = None
        if has_scores:
            try:
                scores = tuple(float(v) for v in row[2:])
            except ValueError as exc:
                raise MalformedRow(f"{path} row {rownum}: non-numeric score: {exc}") from exc
            if scores_are_probabilities:
                if any(not 0.0 <= s <= 1.0 for s in scores):
                    raise ValueOutOfRange(f"{path} row {rownum}: probability score outside [0, 1]")
                total = sum(scores)
                if not 1 - 1e-6 <= total <= 1 + 1e-6:
                    raise ValueOutOfRange(f"{path} row {rownum}: probabilities sum to {total!r}, not 1")
            # lowest index wins ties
            argmax = max(range(k), key=lambda i: (scores[i], -i))
            if p != argmax:
                raise ArgmaxMismatch(
                    f"{path} row {rownum}: predicted_label {p} but argmax of scores is {argmax}"
                )
        records.append(PredictionRecord(t, p, scores))

    if not records:
        raise EmptyLog(f"{path}: no data rows")
    return PredictionLog(tuple(records), label_map, str(path))


def write_prediction_log(log: PredictionLog, path) -> None:
    """Serialize a PredictionLog back to the canonical CSV schema."""
    path = Path(path)
    has_scores = log.records[0].scores is not None
    header = ["true_label", "predicted_label"]
    if has_scores:
        header += [f"score_{i}" for i in range(log.label_map.k)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in log.records:
            row = [rec.true_label, rec.predicted_label]
            if has_scores:
                row += [repr(s) for s in rec.scores]
            writer.writerow(row)


def parse_epoch_log(path) -> list[EpochRecord]:
    """Parse an epoch-log CSV; returns records sorted by epoch, duplicates rejected."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"epoch log not found: {path}")

    rows = _read_rows(path)
    if not rows:
        raise MalformedHeader(f"{path}: empty file, expected a header row")
    if rows[0] != EPOCH_HEADER:
        raise MalformedHeader(
            f"{path}: header {','.join(rows[0])!r} does not match {','.join(EPOCH_HEADER)!r}"
        )

    records = []
    for rownum, row in enumerate(rows[1:], start=1):
        if len(row) != len(EPOCH_HEADER):
            raise MalformedRow(f"{path} row {rownum}: expected {len(EPOCH_HEADER)} fields, got {len(row)}")
        try:
            epoch = int(row[0])
            train_loss, val_loss, train_acc, val_acc = (float(v) for v in row[1:])
        except ValueError as exc:
            raise MalformedRow(f"{path} row {rownum}: {exc}") from exc
        if epoch < 1:
            raise ValueOutOfRange(f"{path} row {rownum}: epoch {epoch} must be >= 1")
        if train_loss < 0 or val_loss < 0:
            raise ValueOutOfRange(f"{path} row {rownum}: negative loss")
        if not 0.0 <= train_acc <= 1.0 or not 0.0 <= val_acc <= 1.0:
            raise ValueOutOfRange(f"{path} row {rownum}: accuracy outside [0, 1]")
        records.append(EpochRecord(epoch, train_loss, val_loss, train_acc, val_acc))

    records.sort(key=lambda r: r.epoch)
    for prev, cur in zip(records, records[1:]):
        if cur.epoch == prev.epoch:
            raise NonMonotonicEpochs(f"{path}: duplicate epoch {cur.epoch}")
    return records


def write_epoch_log(records, path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EPOCH_HEADER)
        for rec in records:
            writer.writerow(
                [rec.epoch, repr(rec.train_loss), repr(rec.val_loss), repr(rec.train_acc), repr(rec.val_acc)]
            )


def scan_assets(root) -> AssetFolder:
    """Recursively list a log folder, partitioned into images and CSV logs.

    Classification is by extension only; anything else is skipped with a
    warning. Output order is lexicographic on the relative path, so the
    listing is deterministic across platforms.
    """
    root = Path(root)
    if not root.is_dir():
        raise MissingFolder(f"asset folder not found or not a directory: {root}")

    images, logs = [], []
    try:
        entries = [p for p in root.rglob("*") if p.is_file()]
    except PermissionError as exc:
        raise PermissionDenied(f"cannot scan {root}: {exc}") from exc
    for p in sorted(entries, key=lambda p: p.relative_to(root).as_posix()):
        ext = p.suffix.lower()
        if ext in _IMAGE_EXTS:
            images.append(p)
        elif ext in _LOG_EXTS:
            logs.append(p)
        else:
            logger.warning("ignoring unrecognized asset %s", p)
    return AssetFolder(root, tuple(images), tuple(logs))
