"""Assemble the final self-contained HTML model card.

Section order is fixed: Overview, Dataset, Model Details, Performance,
Limitations, Uncertainty, References, then any extra sections in config
order. All config-provided text is escaped; generated charts embed as
inline SVG and user-supplied PNG figures as base64 data URIs, so the file
renders with the network and filesystem unplugged. The generation timestamp
is the single non-deterministic field and can be frozen for golden tests.

Generated warnings appended to Limitations: degenerate per-class metrics
(zero denominators) and evaluation-set class imbalance at or beyond 3:1.
"""

from __future__ import annotations

import base64
import html
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .cardspec import CardConfig
from .chartgen import Chart
from .errors import CardIoError, MissingChart
from .metrics import MetricSet
from .uncertainty import CIReport
from .versioning import VersionString, atomic_write_text, content_digest, metrics_fingerprint

IMBALANCE_RATIO = 3.0

_CSS = """
body { font-family: Helvetica, Arial, sans-serif; margin: 0; color: #1a1a1a; background: #f4f4f4; }
main { max-width: 860px; margin: 0 auto 3rem; padding: 0 1.5rem; }
header.banner { background: #234e52; color: #ffffff; padding: 1.2rem 1.5rem; margin-bottom: 1.5rem; }
header.banner h1 { margin: 0 0 0.3rem; font-size: 1.6rem; }
header.banner .meta { font-size: 0.9rem; color: #cde3e1; }
section { background: #ffffff; border: 1px solid #dddddd; border-radius: 6px;
          padding: 1rem 1.4rem; margin-bottom: 1rem; }
h2 { margin-top: 0.2rem; font-size: 1.2rem; border-bottom: 2px solid #234e52; padding-bottom: 0.3rem; }
ul { margin: 0.4rem 0; padding-left: 1.4rem; }
figure { margin: 1rem 0; text-align: center; }
figcaption { font-size: 0.85rem; color: #555555; margin-top: 0.3rem; }
.not-provided { color: #777777; font-style: italic; }
.generated-note { color: #8a4b00; }
img { max-width: 100%; }
"""


@dataclass(frozen=True)
class ModelCardDocument:
    html: str
    version: str
    generated_at: str
    manifest_hash: str


def _esc(text) -> str:
    return html.escape(str(text), quote=True)


def _num(value: float) -> str:
    return repr(float(value))


def _section(section_id: str, title: str, body: str) -> str:
    return f'<section id="{section_id}"><h2>{_esc(title)}</h2>{body}</section>'


def _not_provided(what: str) -> str:
    return f'<p class="not-provided">{_esc(what)} not provided.</p>'


def _bullets(items) -> str:
    return "<ul>" + "".join(f"<li>{_esc(item)}</li>" for item in items) + "</ul>"


def _inline_chart(chart: Chart) -> str:
    return f'<figure>{chart.svg}</figure>'


_SVG_PROLOG = re.compile(r"<\?xml[^>]*\?>\s*|<!DOCTYPE[^>]*>\s*")


def _inline_image(path: Path, caption: str) -> str:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CardIoError(f"cannot read image {path}: {exc}") from exc
    if path.suffix.lower() == ".svg":
        body = _SVG_PROLOG.sub("", data.decode("utf-8"))
    else:
        encoded = base64.b64encode(data).decode("ascii")
        body = f'<img src="data:image/png;base64,{encoded}" alt="{_esc(caption or path.name)}"/>'
    caption_html = f"<figcaption>{_esc(caption)}</figcaption>" if caption else ""
    return f"<figure>{body}{caption_html}</figure>"


def _generated_limitations(metrics: MetricSet, labels) -> list[str]:
    notes = []
    for cls in metrics.per_class:
        name = labels[cls.class_index]
        if cls.degenerate_precision:
            notes.append(
                f"Precision for class '{name}' is reported as 0.0: the class was never predicted."
            )
        if cls.degenerate_recall:
            notes.append(
                f"Recall for class '{name}' is reported as 0.0: the class has no true instances."
            )
    supports = [cls.tp + cls.fn for cls in metrics.per_class]
    if min(supports) > 0 and max(supports) / min(supports) >= IMBALANCE_RATIO:
        notes.append(
            f"Evaluation-set class support is imbalanced ({max(supports)}:{min(supports)} "
            "between the largest and smallest class), which can bias aggregate metrics."
        )
    return notes


def generate_model_card(
    config: CardConfig,
    metrics: MetricSet,
    cis: CIReport,
    charts: list[Chart],
    version: str,
    generated_at: str | None = None,
) -> ModelCardDocument:
    """Build the card document; raises InvalidVersion / MissingChart.

    ``generated_at`` (UTC ISO-8601, second precision) overrides the clock
    for reproducible output.
    """
    parsed_version = VersionString(str(version))
    by_kind = {chart.kind: chart for chart in charts}
    required = {"confusion_heatmap", "ci_errorbars", "metrics_table"}
    if config.assets.epoch_log is not None:
        required.add("training_curves")
    missing = sorted(required - set(by_kind))
    if missing:
        raise MissingChart(f"missing chart(s) for provided inputs: {', '.join(missing)}")

    if generated_at is None:
        generated_at = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    manifest_hash = content_digest(config.to_dict(), metrics_fingerprint(metrics, cis), charts)
    labels = list(config.dataset.ground_truth)

    sections = []

    overview = f"<p>{_esc(config.overview)}</p>"
    if config.intended_use is not None:
        overview += f"<p>Intended use: {_esc(config.intended_use)}</p>"
    else:
        overview += _not_provided("Intended use")
    sections.append(_section("overview", "Overview", overview))

    ground_truth = ", ".join(f"{_esc(name)} ({i})" for i, name in enumerate(labels))
    dataset_body = "<ul>"
    dataset_body += f"<li>Dataset: {_esc(config.dataset.name)}</li>"
    dataset_body += f"<li>Number of Classes: {config.dataset.num_classes}</li>"
    dataset_body += f"<li>Ground Truth: {ground_truth}</li>"
    dataset_body += f"<li>Training/Validation Split: {_esc(config.dataset.split)}</li>"
    dataset_body += "</ul>"
    dataset_body += "<p>Preprocessing:</p>" + _bullets(config.dataset.preprocessing)
    for image in config.assets.images:
        dataset_body += _inline_image(config.resolve(image.path), image.caption)
    sections.append(_section("dataset", "Dataset", dataset_body))

    model_body = "<ul>"
    model_body += f"<li>Input: {_esc(config.model.input_desc)}</li>"
    model_body += f"<li>Output: {_esc(config.model.output_desc)}</li>"
    model_body += f"<li>Model Type: {_esc(config.model.model_type)}</li>"
    model_body += f"<li>Learning Rate: {_num(config.model.learning_rate)}</li>"
    model_body += f"<li>Batch Size: {config.model.batch_size}</li>"
    model_body += f"<li>Parameters: {_esc(config.model.parameter_count)}</li>"
    model_body += "</ul>"
    sections.append(_section("model-details", "Model Details", model_body))

    n = metrics.per_class[0].tp + metrics.per_class[0].fp + metrics.per_class[0].fn + metrics.per_class[0].tn
    perf_body = (
        f"<p>Evaluated on {n} held-out predictions across "
        f"{config.dataset.num_classes} classes. Accuracy: {metrics.accuracy:.4f}.</p>"
    )
    perf_body += _inline_chart(by_kind["confusion_heatmap"])
    perf_body += _inline_chart(by_kind["metrics_table"])
    if "training_curves" in by_kind:
        perf_body += _inline_chart(by_kind["training_curves"])
    else:
        perf_body += _not_provided("Training history")
    sections.append(_section("performance", "Performance", perf_body))

    generated_notes = _generated_limitations(metrics, labels)
    if config.limitations or generated_notes:
        limit_body = _bullets(config.limitations) if config.limitations else ""
        if generated_notes:
            limit_body += '<ul class="generated-note">'
            limit_body += "".join(f"<li>{_esc(note)}</li>" for note in generated_notes)
            limit_body += "</ul>"
    else:
        limit_body = _not_provided("Limitations")
    sections.append(_section("limitations", "Limitations", limit_body))

    unc_body = (
        f"<p>Every reported metric carries a {cis.level:.0%} bootstrap percentile confidence "
        f"interval ({cis.bootstrap_replicates} replicates, seed {cis.seed}); the accuracy "
        f"interval is cross-checked against a Wilson score interval of "
        f"[{cis.accuracy_wilson.lower:.4f}, {cis.accuracy_wilson.upper:.4f}].</p>"
    )
    unc_body += _inline_chart(by_kind["ci_errorbars"])
    sections.append(_section("uncertainty", "Uncertainty", unc_body))

    if config.references:
        ref_body = _bullets(config.references)
    else:
        ref_body = _not_provided("References")
    sections.append(_section("references", "References", ref_body))

    for i, extra in enumerate(config.extra_sections):
        sections.append(_section(f"extra-{i}", extra.name, f"<p>{_esc(extra.content)}</p>"))

    doc = (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n<head>\n<meta charset="utf-8"/>\n'
        f"<!-- manifest: {manifest_hash} | generator: cardsmith {__version__} -->\n"
        f"<title>Model Card - {_esc(config.dataset.name)}</title>\n"
        f"<style>{_CSS}</style>\n</head>\n<body>\n"
        '<header class="banner">\n'
        f"<h1>Model Card - {_esc(config.model.model_type)}</h1>\n"
        f'<div class="meta">Version <span class="version">{_esc(parsed_version.raw)}</span>'
        f" &middot; generated {_esc(generated_at)}</div>\n"
        "</header>\n<main>\n" + "\n".join(sections) + "\n</main>\n</body>\n</html>\n"
    )
    return ModelCardDocument(
        html=doc,
        version=parsed_version.raw,
        generated_at=generated_at,
        manifest_hash=manifest_hash,
    )


def write_card(doc: ModelCardDocument, output_path) -> None:
    """Atomically write the card (temp file + rename)."""
    atomic_write_text(Path(output_path), doc.html)
