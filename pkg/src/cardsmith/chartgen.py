"""Deterministic SVG charts for the card: heatmap, curves, error bars, table.

Charts are assembled as plain strings with fixed-precision coordinates so
that identical inputs always yield identical bytes, on any platform. No
external resources are referenced; the documents embed directly into the
card HTML. Canvas is fixed at 640x480; the only configurable styling is the
title string.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import EmptyMatrix, TooFewEpochs
from .metrics import ConfusionMatrix, MetricSet, metric_names
from .uncertainty import CIReport

WIDTH = 640
HEIGHT = 480

_FONT = "Helvetica, Arial, sans-serif"
_TRAIN_COLOR = "#1f77b4"
_VAL_COLOR = "#ff7f0e"


@dataclass(frozen=True)
class Chart:
    kind: str  # confusion_heatmap | training_curves | ci_errorbars | metrics_table
    svg: str
    width_px: int = WIDTH
    height_px: int = HEIGHT


# canonical on-disk names, one per chart kind
CHART_FILENAMES = {
    "confusion_heatmap": "cm.svg",
    "training_curves": "curves.svg",
    "ci_errorbars": "ci.svg",
    "metrics_table": "table.svg",
}


def save_charts(charts, folder) -> list:
    """Write each chart into the asset folder under its canonical name."""
    from .versioning import atomic_write_text

    written = []
    for chart in charts:
        target = Path(folder) / CHART_FILENAMES[chart.kind]
        atomic_write_text(target, chart.svg)
        written.append(target)
    return written


def _num(x) -> str:
    return f"{float(x):.2f}"


def _svg_doc(body: str, width: int = WIDTH, height: int = HEIGHT) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="{_FONT}">'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>'
        f"{body}</svg>"
    )


def _text(x, y, s, size=13, anchor="start", fill="#1a1a1a", extra="") -> str:
    return (
        f'<text x="{_num(x)}" y="{_num(y)}" font-size="{size}" '
        f'text-anchor="{anchor}" fill="{fill}"{extra}>{escape(str(s))}</text>'
    )


def _title(s: str) -> str:
    return _text(WIDTH / 2, 26, s, size=16, anchor="middle", extra=' font-weight="bold"')


def _cell_shade(value: float) -> str:
    # 0 -> lightest (#f7f7f7), max -> darkest (#282828); monotone in value
    g = 247 - round(value * 207)
    return f"#{g:02x}{g:02x}{g:02x}"


def render_confusion_heatmap(cm: ConfusionMatrix, title: str = "Confusion matrix") -> Chart:
    """K x K shaded grid, each cell annotated with its count."""
    if cm.n == 0:
        raise EmptyMatrix("cannot render an empty confusion matrix")
    k = cm.k
    names = cm.label_map.names
    left, top, right, bottom = 150.0, 70.0, 40.0, 70.0
    grid_w = WIDTH - left - right
    grid_h = HEIGHT - top - bottom
    cw, ch = grid_w / k, grid_h / k
    max_count = int(cm.counts.max())

    parts = [_title(title)]
    for i in range(k):  # true label rows
        for j in range(k):  # predicted label columns
            count = int(cm.counts[i, j])
            v = count / max_count if max_count else 0.0
            x, y = left + j * cw, top + i * ch
            parts.append(
                f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(cw)}" height="{_num(ch)}" '
                f'fill="{_cell_shade(v)}" stroke="#aaaaaa" stroke-width="1"/>'
            )
            text_fill = "#ffffff" if v > 0.5 else "#1a1a1a"
            parts.append(
                _text(x + cw / 2, y + ch / 2 + 5, count, size=14, anchor="middle", fill=text_fill)
            )
    for i, name in enumerate(names):
        parts.append(_text(left - 8, top + i * ch + ch / 2 + 4, name, anchor="end"))
        parts.append(_text(left + i * cw + cw / 2, top + grid_h + 18, name, anchor="middle"))
    parts.append(_text(left + grid_w / 2, HEIGHT - 16, "Predicted label", anchor="middle"))
    parts.append(
        f'<text x="24" y="{_num(top + grid_h / 2)}" font-size="13" text-anchor="middle" '
        f'fill="#1a1a1a" transform="rotate(-90 24 {_num(top + grid_h / 2)})">True label</text>'
    )
    return Chart("confusion_heatmap", _svg_doc("".join(parts)))


def _panel_range(values, clamp01: bool) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    span = hi - lo
    pad = 0.05 * span if span > 0 else 0.05 * max(abs(hi), 1.0)
    lo, hi = lo - pad, hi + pad
    if clamp01:
        lo, hi = max(0.0, lo), min(1.0, hi)
        if lo == hi:  # constant series sitting on a clamp boundary
            lo, hi = max(0.0, lo - 0.05), min(1.0, hi + 0.05)
    return lo, hi


def _polyline(points, color: str) -> str:
    coords = " ".join(f"{_num(x)},{_num(y)}" for x, y in points)
    return f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'


def _line_panel(x0, y0, w, h, epochs, series, clamp01, panel_title, y_label):
    """One panel with train/validation polylines, axes and min/max tick labels."""
    all_vals = [v for vals in series.values() for v in vals]
    lo, hi = _panel_range(all_vals, clamp01)
    e0, e1 = epochs[0], epochs[-1]
    e_span = (e1 - e0) or 1

    def sx(e):
        return x0 + (e - e0) / e_span * w

    def sy(v):
        return y0 + h - (v - lo) / (hi - lo) * h

    parts = [
        f'<rect x="{_num(x0)}" y="{_num(y0)}" width="{_num(w)}" height="{_num(h)}" '
        f'fill="none" stroke="#888888" stroke-width="1"/>',
        _text(x0 + w / 2, y0 - 10, panel_title, size=14, anchor="middle"),
    ]
    for key, color in (("train", _TRAIN_COLOR), ("val", _VAL_COLOR)):
        parts.append(_polyline([(sx(e), sy(v)) for e, v in zip(epochs, series[key])], color))
    parts.append(_text(x0 - 6, sy(lo) + 4, f"{lo:.4g}", size=11, anchor="end"))
    parts.append(_text(x0 - 6, sy(hi) + 4, f"{hi:.4g}", size=11, anchor="end"))
    parts.append(_text(sx(e0), y0 + h + 16, e0, size=11, anchor="middle"))
    parts.append(_text(sx(e1), y0 + h + 16, e1, size=11, anchor="middle"))
    parts.append(_text(x0 + w / 2, y0 + h + 32, "epoch", size=12, anchor="middle"))
    parts.append(
        f'<text x="{_num(x0 - 34)}" y="{_num(y0 + h / 2)}" font-size="12" text-anchor="middle" '
        f'fill="#1a1a1a" transform="rotate(-90 {_num(x0 - 34)} {_num(y0 + h / 2)})">{escape(y_label)}</text>'
    )
    return "".join(parts)


def render_training_curves(history, title: str = "Training and validation curves") -> Chart:
    """Two panels (loss, accuracy), each with train and validation series."""
    if len(history) < 2:
        raise TooFewEpochs(f"need at least 2 epochs, got {len(history)}")
    epochs = [r.epoch for r in history]
    panel_w, panel_h = 240.0, 330.0
    y0 = 70.0
    parts = [_title(title)]
    parts.append(
        _line_panel(
            60.0, y0, panel_w, panel_h, epochs,
            {"train": [r.train_loss for r in history], "val": [r.val_loss for r in history]},
            clamp01=False, panel_title="Loss", y_label="loss",
        )
    )
    parts.append(
        _line_panel(
            380.0, y0, panel_w, panel_h, epochs,
            {"train": [r.train_acc for r in history], "val": [r.val_acc for r in history]},
            clamp01=True, panel_title="Accuracy", y_label="accuracy",
        )
    )
    # shared legend
    lx, ly = 250.0, HEIGHT - 18.0
    parts.append(f'<line x1="{_num(lx)}" y1="{_num(ly - 4)}" x2="{_num(lx + 24)}" y2="{_num(ly - 4)}" stroke="{_TRAIN_COLOR}" stroke-width="2"/>')
    parts.append(_text(lx + 30, ly, "train", size=12))
    parts.append(f'<line x1="{_num(lx + 90)}" y1="{_num(ly - 4)}" x2="{_num(lx + 114)}" y2="{_num(ly - 4)}" stroke="{_VAL_COLOR}" stroke-width="2"/>')
    parts.append(_text(lx + 120, ly, "validation", size=12))
    return Chart("training_curves", _svg_doc("".join(parts)))


def _display_name(name: str, labels) -> str:
    if name == "accuracy":
        return "Accuracy"
    if name.startswith("macro_"):
        return "Macro " + name.split("_", 1)[1].replace("f1", "F1")
    _, idx, stat = name.split("_", 2)
    return f"{stat.replace('f1', 'F1').capitalize()} ({labels[int(idx)]})"


def render_ci_errorbars(
    report: CIReport,
    metrics: MetricSet,
    labels=None,
    title: str = "Metrics with 95% confidence intervals",
) -> Chart:
    """One horizontal bar per metric: marker at the estimate, bar spanning the CI."""
    labels = list(labels) if labels is not None else [f"class {i}" for i in range(len(metrics.per_class))]
    names = list(report.intervals.keys())
    left, right, top, bottom = 210.0, 40.0, 60.0, 50.0
    plot_w = WIDTH - left - right
    plot_h = HEIGHT - top - bottom
    row_h = plot_h / len(names)

    def sx(v):
        return left + v * plot_w

    parts = [_title(title)]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        parts.append(
            f'<line x1="{_num(sx(tick))}" y1="{_num(top)}" x2="{_num(sx(tick))}" '
            f'y2="{_num(top + plot_h)}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(_text(sx(tick), top + plot_h + 18, f"{tick:.2f}", size=11, anchor="middle"))
    for row, name in enumerate(names):
        ival = report.intervals[name]
        est = metrics.value(name)
        y = top + row * row_h + row_h / 2
        parts.append(_text(left - 10, y + 4, _display_name(name, labels), size=12, anchor="end"))
        parts.append(
            f'<line x1="{_num(sx(ival.lower))}" y1="{_num(y)}" x2="{_num(sx(ival.upper))}" '
            f'y2="{_num(y)}" stroke="#1f77b4" stroke-width="2"/>'
        )
        for xend in (ival.lower, ival.upper):
            parts.append(
                f'<line x1="{_num(sx(xend))}" y1="{_num(y - 5)}" x2="{_num(sx(xend))}" '
                f'y2="{_num(y + 5)}" stroke="#1f77b4" stroke-width="2"/>'
            )
        parts.append(f'<circle cx="{_num(sx(est))}" cy="{_num(y)}" r="3.5" fill="#d62728"/>')
    return Chart("ci_errorbars", _svg_doc("".join(parts)))


def render_metrics_table(
    metrics: MetricSet,
    report: CIReport,
    labels=None,
    title: str = "Performance metrics",
) -> Chart:
    """Tabular chart: metric name, point estimate (4 dp), 95% CI as [l, u]."""
    k = len(metrics.per_class)
    names = metric_names(k)
    labels = list(labels) if labels is not None else [f"class {i}" for i in range(k)]
    degenerate = set()
    for c in metrics.per_class:
        if c.degenerate_precision:
            degenerate.add(f"class_{c.class_index}_precision")
        if c.degenerate_recall:
            degenerate.add(f"class_{c.class_index}_recall")

    left, top = 60.0, 60.0
    col_metric, col_value, col_ci = left, 320.0, 430.0
    row_h = min(26.0, (HEIGHT - top - 60.0) / (len(names) + 1))
    parts = [_title(title)]
    header_y = top
    parts.append(_text(col_metric, header_y, "Metric", size=13, extra=' font-weight="bold"'))
    parts.append(_text(col_value, header_y, "Estimate", size=13, extra=' font-weight="bold"'))
    parts.append(_text(col_ci, header_y, "95% CI", size=13, extra=' font-weight="bold"'))
    parts.append(
        f'<line x1="{_num(left - 10)}" y1="{_num(header_y + 8)}" x2="{_num(WIDTH - 50)}" '
        f'y2="{_num(header_y + 8)}" stroke="#888888" stroke-width="1"/>'
    )
    any_degenerate = False
    for row, name in enumerate(names, start=1):
        y = top + row * row_h
        marker = ""
        if name in degenerate:
            marker = " *"
            any_degenerate = True
        ival = report.intervals[name]
        parts.append(_text(col_metric, y, _display_name(name, labels) + marker, size=12))
        parts.append(_text(col_value, y, f"{metrics.value(name):.4f}", size=12))
        parts.append(_text(col_ci, y, f"[{ival.lower:.4f}, {ival.upper:.4f}]", size=12))
    if any_degenerate:
        parts.append(
            _text(left, HEIGHT - 24, "* zero denominator; metric reported as 0.0", size=11, fill="#555555")
        )
    return Chart("metrics_table", _svg_doc("".join(parts)))
