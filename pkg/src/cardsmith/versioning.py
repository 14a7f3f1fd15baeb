"""Content manifests, the card registry, and version-to-version diffs.

A version string alone cannot reveal that two "1.0" cards were built from
different inputs, so every registration carries a sha256 manifest hash over
the canonicalized config, the metrics document and the chart bytes
(sha256 is the only digest used anywhere in this package). The registry is
a single ``cards.registry.json`` per project folder: a JSON array of
manifest objects, kept sorted by version.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CardIoError, InvalidVersion, UnknownVersion, VersionConflict

REGISTRY_NAME = "cards.registry.json"

_VERSION_RE = re.compile(r"^(0|[1-9]\d*)(\.(0|[1-9]\d*))?(\.(0|[1-9]\d*))?$")


@dataclass(frozen=True, order=False)
class VersionString:
    """MAJOR[.MINOR[.PATCH]]; missing components compare as 0."""

    raw: str
    parts: tuple[int, int, int] = field(init=False, compare=False)

    def __post_init__(self):
        if not _VERSION_RE.match(self.raw):
            raise InvalidVersion(f"invalid version {self.raw!r}, expected MAJOR[.MINOR[.PATCH]]")
        nums = [int(x) for x in self.raw.split(".")]
        nums += [0] * (3 - len(nums))
        object.__setattr__(self, "parts", tuple(nums))

    def __lt__(self, other: "VersionString") -> bool:
        return self.parts < other.parts

    def __str__(self) -> str:
        return self.raw


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json(obj) -> str:
    """Key-sorted, whitespace-free JSON; the hashing canonical form."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_digest(config_dict: dict, metrics_fingerprint: dict, charts) -> str:
    """Manifest hash over config, metric values and chart bytes (order-insensitive
    for mappings, order-sensitive for the chart list)."""
    payload = {
        "config": config_dict,
        "metrics": metrics_fingerprint,
        "charts": [{"kind": ch.kind, "sha256": sha256_hex(ch.svg.encode("utf-8"))} for ch in charts],
    }
    return sha256_hex(canonical_json(payload).encode("utf-8"))


def metrics_fingerprint(metrics, cis) -> dict:
    """The metrics portion of the manifest hash input.

    Built from the MetricSet and CIReport alone (scalars, per-class counts,
    intervals); the raw confusion matrix enters the hash through the heatmap
    chart bytes instead, so card generation and registration always agree.
    """
    from .uncertainty import ci_document  # deferred: versioning is imported by uncertainty users

    doc = {
        "accuracy": metrics.accuracy,
        "macro_precision": metrics.macro_precision,
        "macro_recall": metrics.macro_recall,
        "macro_f1": metrics.macro_f1,
        "micro_precision": metrics.micro_precision,
        "micro_recall": metrics.micro_recall,
        "micro_f1": metrics.micro_f1,
        "per_class": [
            {
                "class_index": c.class_index,
                "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn,
                "precision": c.precision, "recall": c.recall, "f1": c.f1,
                "degenerate_precision": c.degenerate_precision,
                "degenerate_recall": c.degenerate_recall,
            }
            for c in metrics.per_class
        ],
        "ci": ci_document(cis),
    }
    return doc


def digest_file(path) -> str:
    try:
        return sha256_hex(Path(path).read_bytes())
    except OSError as exc:
        raise CardIoError(f"cannot digest {path}: {exc}") from exc


@dataclass(frozen=True)
class CardManifest:
    version: VersionString
    manifest_hash: str
    input_digests: dict[str, str]
    created_at: str  # UTC ISO-8601, second precision
    config: dict
    metrics: dict

    def to_entry(self) -> dict:
        return {
            "version": self.version.raw,
            "manifest_hash": self.manifest_hash,
            "created_at": self.created_at,
            "input_digests": dict(sorted(self.input_digests.items())),
            "config": self.config,
            "metrics": self.metrics,
        }


@dataclass(frozen=True)
class CardDiff:
    config_changes: list[tuple[str, object, object]]
    metric_deltas: list[tuple[str, float, float, float]]
    asset_changes: list[tuple[str, str]]  # (path, added|removed|modified)

    @property
    def empty(self) -> bool:
        return not (self.config_changes or self.metric_deltas or self.asset_changes)


def atomic_write_text(path, text: str) -> None:
    """Write via temp file + rename so readers never observe partial content."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
    except OSError as exc:
        raise CardIoError(f"cannot write {path}: {exc}") from exc


def load_registry(registry_path) -> list[dict]:
    registry_path = Path(registry_path)
    if not registry_path.exists():
        return []
    try:
        data = json.loads(registry_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CardIoError(f"cannot read registry {registry_path}: {exc}") from exc
    if not isinstance(data, list):
        raise CardIoError(f"registry {registry_path} is not a JSON array")
    return data


def find_entry(entries: list[dict], version: str) -> dict | None:
    for entry in entries:
        if entry.get("version") == version:
            return entry
    return None


def register_card(manifest: CardManifest, registry_path) -> None:
    """Append-only registration; same version + same hash is an idempotent no-op."""
    entries = load_registry(registry_path)
    existing = find_entry(entries, manifest.version.raw)
    if existing is not None:
        if existing.get("manifest_hash") == manifest.manifest_hash:
            return
        raise VersionConflict(
            f"version {manifest.version.raw} already registered with hash "
            f"{existing.get('manifest_hash')}, refusing {manifest.manifest_hash}"
        )
    entries.append(manifest.to_entry())
    entries.sort(key=lambda e: VersionString(e["version"]).parts)
    atomic_write_text(registry_path, json.dumps(entries, indent=2, ensure_ascii=False) + "\n")


def check_registration(registry_path, version: str, manifest_hash: str) -> None:
    """Raise VersionConflict early, before any output is written."""
    existing = find_entry(load_registry(registry_path), version)
    if existing is not None and existing.get("manifest_hash") != manifest_hash:
        raise VersionConflict(
            f"version {version} already registered with hash "
            f"{existing.get('manifest_hash')}, refusing {manifest_hash}"
        )


def _flatten(obj, prefix: str = "") -> dict[str, object]:
    flat = {}
    if isinstance(obj, dict):
        for key, value in obj.items():
            sub = f"{prefix}.{key}" if prefix else str(key)
            flat.update(_flatten(value, sub))
    elif isinstance(obj, list):
        for i, value in enumerate(obj):
            flat.update(_flatten(value, f"{prefix}[{i}]"))
    else:
        flat[prefix] = obj
    return flat


# metric scalars compared by diff_cards, in report order
_DIFF_METRICS = (
    "accuracy",
    "macro_precision", "macro_recall", "macro_f1",
    "micro_precision", "micro_recall", "micro_f1",
)


def _metric_scalars(metrics_doc: dict) -> dict[str, float]:
    out = {name: metrics_doc[name] for name in _DIFF_METRICS if name in metrics_doc}
    for cls in metrics_doc.get("per_class", []):
        i = cls["class_index"]
        for stat in ("precision", "recall", "f1"):
            out[f"class_{i}_{stat}"] = cls[stat]
    return out


def diff_cards(registry_path, old_version: str, new_version: str) -> CardDiff:
    """Field-level diff between two registered versions.

    Config values are compared on their canonical forms; metric deltas are
    new - old, reported at 4-decimal precision; assets compare by digest.
    """
    entries = load_registry(registry_path)
    old = find_entry(entries, old_version)
    new = find_entry(entries, new_version)
    if old is None:
        raise UnknownVersion(f"version {old_version} not found in registry")
    if new is None:
        raise UnknownVersion(f"version {new_version} not found in registry")

    old_flat = _flatten(old.get("config", {}))
    new_flat = _flatten(new.get("config", {}))
    config_changes = []
    for path in sorted(set(old_flat) | set(new_flat)):
        o = old_flat.get(path, "<absent>")
        n = new_flat.get(path, "<absent>")
        if o != n:
            config_changes.append((path, o, n))

    old_metrics = _metric_scalars(old.get("metrics", {}))
    new_metrics = _metric_scalars(new.get("metrics", {}))
    metric_deltas = []
    for name in old_metrics:
        if name in new_metrics and old_metrics[name] != new_metrics[name]:
            o, n = old_metrics[name], new_metrics[name]
            metric_deltas.append((name, round(o, 4), round(n, 4), round(n - o, 4)))

    old_assets = old.get("input_digests", {})
    new_assets = new.get("input_digests", {})
    asset_changes = []
    for path in sorted(set(old_assets) | set(new_assets)):
        if path not in old_assets:
            asset_changes.append((path, "added"))
        elif path not in new_assets:
            asset_changes.append((path, "removed"))
        elif old_assets[path] != new_assets[path]:
            asset_changes.append((path, "modified"))

    return CardDiff(config_changes, metric_deltas, asset_changes)
