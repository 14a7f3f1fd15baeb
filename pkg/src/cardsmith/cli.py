"""Command-line entry point: validate, generate, metrics, diff.

Machine-readable results go to stdout, diagnostics to stderr. Exit codes:
0 success, 1 validation errors, 2 I/O errors, 3 internal errors. The
registry used by ``generate`` is ``cards.registry.json`` next to the output
card, keeping each project folder self-describing.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, cardspec, chartgen, ingest, metrics, render, uncertainty, versioning
from .errors import CardError, InvalidVersion


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _normalize_timestamp(raw: str) -> str:
    try:
        stamp = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError as exc:
        raise InvalidVersion(f"--freeze-timestamp must be ISO-8601, got {raw!r}") from exc
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def cmd_validate(args) -> int:
    parsed = cardspec.parse_config(args.config)
    if isinstance(parsed, cardspec.ValidationReport):
        print(parsed.render(), file=sys.stderr)
        return 1
    print("ok")
    return 0


def _ci_params(config: cardspec.CardConfig, seed_override: int | None):
    unc = config.uncertainty or cardspec.UncertaintySection()
    seed = seed_override if seed_override is not None else unc.seed
    return unc.level, unc.replicates, seed


def _pipeline(config: cardspec.CardConfig, seed_override: int | None):
    label_map = ingest.ClassLabelMap.from_names(config.dataset.ground_truth)
    log = ingest.parse_prediction_log(config.resolve(config.assets.prediction_log), label_map)
    history = None
    if config.assets.epoch_log is not None:
        history = ingest.parse_epoch_log(config.resolve(config.assets.epoch_log))

    cm = metrics.build_confusion_matrix(log)
    ms = metrics.derive_metrics(cm)
    level, replicates, seed = _ci_params(config, seed_override)
    cis = uncertainty.build_ci_report(log, ms, replicates=replicates, seed=seed, level=level)

    labels = config.dataset.ground_truth
    charts = [
        chartgen.render_confusion_heatmap(cm),
        chartgen.render_ci_errorbars(cis, ms, labels=labels),
        chartgen.render_metrics_table(ms, cis, labels=labels),
    ]
    if history is not None:
        charts.append(chartgen.render_training_curves(history))
    return cm, ms, cis, charts


def cmd_generate(args) -> int:
    parsed = cardspec.parse_config(args.config)
    if isinstance(parsed, cardspec.ValidationReport):
        print(parsed.render(), file=sys.stderr)
        return 1
    config = parsed

    version = versioning.VersionString(args.version)
    cm, ms, cis, charts = _pipeline(config, args.seed)

    generated_at = _normalize_timestamp(args.freeze_timestamp) if args.freeze_timestamp else None
    doc = render.generate_model_card(config, ms, cis, charts, version.raw, generated_at=generated_at)

    output_path = Path(args.output)
    registry_path = output_path.parent / versioning.REGISTRY_NAME
    # refuse conflicting versions before anything touches disk
    versioning.check_registration(registry_path, version.raw, doc.manifest_hash)

    input_digests = {config.assets.prediction_log: versioning.digest_file(config.resolve(config.assets.prediction_log))}
    if config.assets.epoch_log is not None:
        input_digests[config.assets.epoch_log] = versioning.digest_file(config.resolve(config.assets.epoch_log))
    for image in config.assets.images:
        input_digests[image.path] = versioning.digest_file(config.resolve(image.path))

    metrics_doc = metrics.metrics_document(cm, ms)
    metrics_doc["ci"] = uncertainty.ci_document(cis)
    manifest = versioning.CardManifest(
        version=version,
        manifest_hash=doc.manifest_hash,
        input_digests=input_digests,
        created_at=doc.generated_at,
        config=config.to_dict(),
        metrics=metrics_doc,
    )

    chartgen.save_charts(charts, output_path.parent)
    render.write_card(doc, output_path)
    versioning.register_card(manifest, registry_path)
    print(f"{output_path} {doc.manifest_hash}")
    return 0


def _metrics_table_text(ms: metrics.MetricSet, cis: uncertainty.CIReport, labels) -> str:
    lines = [f"{'metric':<28}{'estimate':>10}  95% CI"]
    for name in metrics.metric_names(len(labels)):
        ival = cis.intervals[name]
        lines.append(f"{name:<28}{ms.value(name):>10.4f}  [{ival.lower:.4f}, {ival.upper:.4f}]")
    return "\n".join(lines)


def cmd_metrics(args) -> int:
    label_map = ingest.load_label_map(args.labels)
    log = ingest.parse_prediction_log(args.predictions, label_map)
    cm = metrics.build_confusion_matrix(log)
    ms = metrics.derive_metrics(cm)
    cis = uncertainty.build_ci_report(log, ms)
    if args.json:
        doc = metrics.metrics_document(cm, ms)
        doc["ci"] = uncertainty.ci_document(cis)
        print(json.dumps(doc, indent=2))
    else:
        print(_metrics_table_text(ms, cis, label_map.names))
    return 0


def cmd_diff(args) -> int:
    diff = versioning.diff_cards(args.registry, args.old, args.new)
    if diff.empty:
        print("no changes")
        return 0
    if diff.config_changes:
        print("config changes:")
        for path, old, new in diff.config_changes:
            print(f"  {path}: {old!r} -> {new!r}")
    if diff.metric_deltas:
        print("metric deltas:")
        for name, old, new, delta in diff.metric_deltas:
            print(f"  {name}: {old:.4f} -> {new:.4f} (delta {delta:+.4f})")
    if diff.asset_changes:
        print("asset changes:")
        for path, kind in diff.asset_changes:
            print(f"  {path}: {kind}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cardsmith",
        description="Generate versioned, self-contained HTML model cards from run artifacts.",
    )
    parser.add_argument("--version", action="version", version=f"cardsmith {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a card config YAML")
    p_validate.add_argument("--config", required=True, help="path to the card config YAML")
    p_validate.set_defaults(func=cmd_validate)

    p_generate = sub.add_parser("generate", help="run the full pipeline and write the card")
    p_generate.add_argument("--config", required=True, help="path to the card config YAML")
    p_generate.add_argument("--output", required=True, help="output HTML path")
    p_generate.add_argument("--version", required=True, help="card version (MAJOR[.MINOR[.PATCH]])")
    p_generate.add_argument("--seed", type=int, default=None, help="override the bootstrap seed")
    p_generate.add_argument(
        "--freeze-timestamp",
        default=None,
        metavar="ISO8601",
        help="fix the generation timestamp (reproducible builds/CI)",
    )
    p_generate.set_defaults(func=cmd_generate)

    p_metrics = sub.add_parser("metrics", help="print metrics + CIs for a prediction log")
    p_metrics.add_argument("--predictions", required=True, help="prediction log CSV")
    p_metrics.add_argument("--labels", required=True, help="label map YAML (list of 'index: name')")
    p_metrics.add_argument("--json", action="store_true", help="emit the metrics JSON document")
    p_metrics.set_defaults(func=cmd_metrics)

    p_diff = sub.add_parser("diff", help="diff two registered card versions")
    p_diff.add_argument("--registry", required=True, help="path to cards.registry.json")
    p_diff.add_argument("--old", required=True, help="old version string")
    p_diff.add_argument("--new", required=True, help="new version string")
    p_diff.set_defaults(func=cmd_diff)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CardError as exc:
        return _fail(str(exc), exc.exit_code)
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit 3
        return _fail(f"internal error: {exc}", 3)


if __name__ == "__main__":
    sys.exit(main())
