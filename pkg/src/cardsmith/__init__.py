"""cardsmith: versioned, self-contained HTML model cards for classifiers.

Typical use is the ``cardsmith`` CLI (validate / metrics / generate / diff);
the same pipeline is importable piecewise from the submodules re-exported
here.
"""

__version__ = "0.1.0"

from . import errors
from .cardspec import CardConfig, ValidationReport, apply_defaults, parse_config
from .chartgen import (
    Chart,
    render_ci_errorbars,
    render_confusion_heatmap,
    render_metrics_table,
    render_training_curves,
)
from .ingest import (
    AssetFolder,
    ClassLabelMap,
    EpochRecord,
    PredictionLog,
    PredictionRecord,
    load_label_map,
    parse_epoch_log,
    parse_prediction_log,
    scan_assets,
)
from .metrics import ConfusionMatrix, MetricSet, build_confusion_matrix, derive_metrics
from .render import ModelCardDocument, generate_model_card, write_card
from .uncertainty import CIReport, ConfidenceInterval, bootstrap_ci, build_ci_report, wilson_interval
from .versioning import CardDiff, CardManifest, VersionString, diff_cards, register_card

__all__ = [
    "__version__",
    "errors",
    "AssetFolder",
    "CardConfig",
    "CardDiff",
    "CardManifest",
    "Chart",
    "CIReport",
    "ClassLabelMap",
    "ConfidenceInterval",
    "ConfusionMatrix",
    "EpochRecord",
    "MetricSet",
    "ModelCardDocument",
    "PredictionLog",
    "PredictionRecord",
    "ValidationReport",
    "VersionString",
    "apply_defaults",
    "bootstrap_ci",
    "build_ci_report",
    "build_confusion_matrix",
    "derive_metrics",
    "diff_cards",
    "generate_model_card",
    "load_label_map",
    "parse_config",
    "parse_epoch_log",
    "parse_prediction_log",
    "register_card",
    "render_ci_errorbars",
    "render_confusion_heatmap",
    "render_metrics_table",
    "render_training_curves",
    "scan_assets",
    "wilson_interval",
    "write_card",
]
