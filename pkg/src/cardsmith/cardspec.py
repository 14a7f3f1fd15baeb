"""The YAML card specification: schema, parsing, validation, defaults.

One config file drives a whole card. Validation is batch-mode: every
violation is collected into a ValidationReport with its dotted YAML path
(``dataset.ground_truth``, ``assets.images[0].path``) rather than failing
on the first problem, since configs are written by hand.

Anchors and aliases are rejected outright; they buy nothing in a flat
config and make files non-deterministic to audit. A machine-readable
schema ships in docs/config.schema.json.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import MissingFile, YamlSyntaxError

DEFAULT_LEVEL = 0.95
DEFAULT_REPLICATES = 2000
DEFAULT_SEED = 42


@dataclass(frozen=True)
class ImageAsset:
    path: str
    caption: str = ""


@dataclass(frozen=True)
class DatasetSection:
    name: str
    num_classes: int
    ground_truth: tuple[str, ...]
    split: str
    preprocessing: tuple[str, ...]


@dataclass(frozen=True)
class ModelSection:
    input_desc: str
    output_desc: str
    model_type: str
    learning_rate: float
    batch_size: int
    parameter_count: str


@dataclass(frozen=True)
class AssetsSection:
    prediction_log: str
    epoch_log: str | None = None
    images: tuple[ImageAsset, ...] = ()


@dataclass(frozen=True)
class UncertaintySection:
    level: float = DEFAULT_LEVEL
    replicates: int = DEFAULT_REPLICATES
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class ExtraSection:
    name: str
    content: str


@dataclass(frozen=True)
class CardConfig:
    overview: str
    dataset: DatasetSection
    model: ModelSection
    assets: AssetsSection
    intended_use: str | None = None
    limitations: tuple[str, ...] = ()
    references: tuple[str, ...] = ()
    uncertainty: UncertaintySection | None = None
    extra_sections: tuple[ExtraSection, ...] = ()
    # where relative asset paths resolve from; not part of config identity
    base_dir: str = field(default=".", compare=False)

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def to_dict(self) -> dict:
        """Plain dict mirroring the YAML schema; optional absences omitted."""
        out: dict = {"overview": self.overview}
        if self.intended_use is not None:
            out["intended_use"] = self.intended_use
        out["dataset"] = {
            "name": self.dataset.name,
            "num_classes": self.dataset.num_classes,
            "ground_truth": list(self.dataset.ground_truth),
            "split": self.dataset.split,
            "preprocessing": list(self.dataset.preprocessing),
        }
        out["model"] = {
            "input_desc": self.model.input_desc,
            "output_desc": self.model.output_desc,
            "model_type": self.model.model_type,
            "learning_rate": self.model.learning_rate,
            "batch_size": self.model.batch_size,
            "parameter_count": self.model.parameter_count,
        }
        out["limitations"] = list(self.limitations)
        out["references"] = list(self.references)
        assets: dict = {"prediction_log": self.assets.prediction_log}
        if self.assets.epoch_log is not None:
            assets["epoch_log"] = self.assets.epoch_log
        assets["images"] = [{"path": im.path, "caption": im.caption} for im in self.assets.images]
        out["assets"] = assets
        unc = self.uncertainty or UncertaintySection()
        out["uncertainty"] = {"level": unc.level, "replicates": unc.replicates, "seed": unc.seed}
        if self.extra_sections:
            out["extra_sections"] = [
                {"name": s.name, "content": s.content} for s in self.extra_sections
            ]
        return out


@dataclass
class ValidationReport:
    errors: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, path: str, message: str) -> None:
        self.errors.append((path, message))

    def warn(self, path: str, message: str) -> None:
        self.warnings.append((path, message))

    def render(self) -> str:
        lines = [f"error: {p}: {m}" for p, m in self.errors]
        lines += [f"warning: {p}: {m}" for p, m in self.warnings]
        return "\n".join(lines)


def apply_defaults(partial: CardConfig) -> CardConfig:
    """Fill documented defaults; idempotent."""
    changes = {}
    if partial.uncertainty is None:
        changes["uncertainty"] = UncertaintySection()
    return dataclasses.replace(partial, **changes) if changes else partial


def _reject_anchors(text: str) -> None:
    try:
        for event in yaml.parse(text):
            if isinstance(event, yaml.AliasEvent):
                raise YamlSyntaxError("YAML aliases (*ref) are not supported")
            if getattr(event, "anchor", None):
                raise YamlSyntaxError("YAML anchors (&ref) are not supported")
    except yaml.YAMLError as exc:
        raise _syntax_error(exc) from exc


def _syntax_error(exc: yaml.YAMLError) -> YamlSyntaxError:
    mark = getattr(exc, "problem_mark", None)
    if mark is not None:
        return YamlSyntaxError(f"YAML syntax error at line {mark.line + 1}, column {mark.column + 1}: {exc}")
    return YamlSyntaxError(f"YAML syntax error: {exc}")


class _Checker:
    """Walks the raw mapping, accumulating typed values and report entries."""

    def __init__(self, report: ValidationReport, base_dir: Path):
        self.report = report
        self.base_dir = base_dir

    def str_at(
        self, mapping: dict, key: str, path: str,
        required: bool = True, default=None, allow_empty: bool = False,
    ):
        if key not in mapping:
            if required:
                self.report.error(path, "required field is missing")
            return default
        value = mapping[key]
        if not isinstance(value, str) or (not allow_empty and not value.strip()):
            self.report.error(path, f"expected non-empty text, got {value!r}")
            return default
        return value

    def int_at(self, mapping: dict, key: str, path: str, minimum=None, required: bool = True, default=None):
        if key not in mapping:
            if required:
                self.report.error(path, "required field is missing")
            return default
        value = mapping[key]
        if isinstance(value, bool) or not isinstance(value, int):
            self.report.error(path, f"expected an integer, got {value!r}")
            return default
        if minimum is not None and value < minimum:
            self.report.error(path, f"must be >= {minimum}, got {value}")
            return default
        return value

    def real_at(self, mapping: dict, key: str, path: str, required: bool = True, default=None):
        if key not in mapping:
            if required:
                self.report.error(path, "required field is missing")
            return default
        value = mapping[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.report.error(path, f"expected a number, got {value!r}")
            return default
        return float(value)

    def str_list_at(self, mapping: dict, key: str, path: str, required: bool = True):
        if key not in mapping:
            if required:
                self.report.error(path, "required field is missing")
                return None
            return ()
        value = mapping[key]
        if not isinstance(value, list):
            self.report.error(path, f"expected a list of text entries, got {value!r}")
            return None
        items = []
        ok = True
        for i, item in enumerate(value):
            if not isinstance(item, str):
                self.report.error(f"{path}[{i}]", f"expected text, got {item!r}")
                ok = False
            else:
                items.append(item)
        return tuple(items) if ok else None

    def mapping_at(self, data: dict, key: str, path: str, required: bool = True):
        if key not in data:
            if required:
                self.report.error(path, "required section is missing")
            return None
        value = data[key]
        if not isinstance(value, dict):
            self.report.error(path, f"expected a mapping, got {value!r}")
            return None
        return value

    def path_exists(self, rel: str, path: str) -> None:
        target = Path(rel)
        if not target.is_absolute():
            target = self.base_dir / target
        if not target.exists():
            self.report.error(path, f"asset path does not exist: {target}")

    def unknown_keys(self, mapping: dict, known: set, prefix: str = "") -> None:
        for key in mapping:
            if key not in known:
                where = f"{prefix}{key}" if prefix else str(key)
                self.report.warn(where, "unknown field (ignored)")


def _validate(data, base_dir: Path) -> tuple[CardConfig | None, ValidationReport]:
    report = ValidationReport()
    if not isinstance(data, dict):
        report.error("(root)", f"top level must be a mapping, got {type(data).__name__}")
        return None, report
    c = _Checker(report, base_dir)
    c.unknown_keys(
        data,
        {
            "overview", "intended_use", "dataset", "model", "limitations",
            "references", "assets", "uncertainty", "extra_sections",
        },
    )

    overview = c.str_at(data, "overview", "overview")
    intended_use = c.str_at(data, "intended_use", "intended_use", required=False)

    dataset = None
    dmap = c.mapping_at(data, "dataset", "dataset")
    if dmap is not None:
        c.unknown_keys(dmap, {"name", "num_classes", "ground_truth", "split", "preprocessing"}, "dataset.")
        name = c.str_at(dmap, "name", "dataset.name")
        num_classes = c.int_at(dmap, "num_classes", "dataset.num_classes", minimum=2)
        ground_truth = c.str_list_at(dmap, "ground_truth", "dataset.ground_truth")
        split = c.str_at(dmap, "split", "dataset.split")
        preprocessing = c.str_list_at(dmap, "preprocessing", "dataset.preprocessing")
        if ground_truth is not None and num_classes is not None and len(ground_truth) != num_classes:
            report.error(
                "dataset.ground_truth",
                f"has {len(ground_truth)} entries but num_classes is {num_classes}",
            )
        elif ground_truth is not None and len(set(ground_truth)) != len(ground_truth):
            report.error("dataset.ground_truth", "class names must be unique")
        if None not in (name, num_classes, ground_truth, split, preprocessing):
            dataset = DatasetSection(name, num_classes, ground_truth, split, preprocessing)

    model = None
    mmap = c.mapping_at(data, "model", "model")
    if mmap is not None:
        c.unknown_keys(
            mmap,
            {"input_desc", "output_desc", "model_type", "learning_rate", "batch_size", "parameter_count"},
            "model.",
        )
        input_desc = c.str_at(mmap, "input_desc", "model.input_desc")
        output_desc = c.str_at(mmap, "output_desc", "model.output_desc")
        model_type = c.str_at(mmap, "model_type", "model.model_type")
        learning_rate = c.real_at(mmap, "learning_rate", "model.learning_rate")
        if learning_rate is not None and learning_rate <= 0:
            report.error("model.learning_rate", f"must be positive, got {learning_rate}")
            learning_rate = None
        batch_size = c.int_at(mmap, "batch_size", "model.batch_size", minimum=1)
        parameter_count = c.str_at(mmap, "parameter_count", "model.parameter_count")
        if None not in (input_desc, output_desc, model_type, learning_rate, batch_size, parameter_count):
            model = ModelSection(input_desc, output_desc, model_type, learning_rate, batch_size, parameter_count)

    limitations = c.str_list_at(data, "limitations", "limitations", required=False)
    references = c.str_list_at(data, "references", "references", required=False)

    assets = None
    amap = c.mapping_at(data, "assets", "assets")
    if amap is not None:
        c.unknown_keys(amap, {"prediction_log", "epoch_log", "images"}, "assets.")
        prediction_log = c.str_at(amap, "prediction_log", "assets.prediction_log")
        if prediction_log is not None:
            c.path_exists(prediction_log, "assets.prediction_log")
        epoch_log = c.str_at(amap, "epoch_log", "assets.epoch_log", required=False)
        if epoch_log is not None:
            c.path_exists(epoch_log, "assets.epoch_log")
        images = []
        raw_images = amap.get("images", [])
        if not isinstance(raw_images, list):
            report.error("assets.images", f"expected a list, got {raw_images!r}")
        else:
            for i, item in enumerate(raw_images):
                ipath = f"assets.images[{i}]"
                if not isinstance(item, dict):
                    report.error(ipath, f"expected a mapping with 'path', got {item!r}")
                    continue
                c.unknown_keys(item, {"path", "caption"}, ipath + ".")
                img_path = c.str_at(item, "path", ipath + ".path")
                caption = c.str_at(
                    item, "caption", ipath + ".caption", required=False, default="", allow_empty=True
                )
                if img_path is not None:
                    if not img_path.lower().endswith((".png", ".svg")):
                        report.error(ipath + ".path", f"unsupported image type (want .png or .svg): {img_path}")
                    else:
                        c.path_exists(img_path, ipath + ".path")
                        images.append(ImageAsset(img_path, caption or ""))
        if prediction_log is not None:
            assets = AssetsSection(prediction_log, epoch_log, tuple(images))

    uncertainty = None
    if "uncertainty" in data:
        umap = c.mapping_at(data, "uncertainty", "uncertainty")
        if umap is not None:
            c.unknown_keys(umap, {"level", "replicates", "seed"}, "uncertainty.")
            level = c.real_at(umap, "level", "uncertainty.level", required=False, default=DEFAULT_LEVEL)
            if level is not None and not 0.0 < level < 1.0:
                report.error("uncertainty.level", f"must be in (0, 1), got {level}")
                level = None
            replicates = c.int_at(
                umap, "replicates", "uncertainty.replicates",
                minimum=100, required=False, default=DEFAULT_REPLICATES,
            )
            seed = c.int_at(umap, "seed", "uncertainty.seed", required=False, default=DEFAULT_SEED)
            if None not in (level, replicates, seed):
                uncertainty = UncertaintySection(level, replicates, seed)

    extra_sections = []
    if "extra_sections" in data:
        raw_extra = data["extra_sections"]
        if not isinstance(raw_extra, list):
            report.error("extra_sections", f"expected a list, got {raw_extra!r}")
        else:
            for i, item in enumerate(raw_extra):
                epath = f"extra_sections[{i}]"
                if not isinstance(item, dict):
                    report.error(epath, f"expected a mapping with 'name' and 'content', got {item!r}")
                    continue
                c.unknown_keys(item, {"name", "content"}, epath + ".")
                name = c.str_at(item, "name", epath + ".name")
                content = c.str_at(item, "content", epath + ".content")
                if None not in (name, content):
                    extra_sections.append(ExtraSection(name, content))

    if not report.ok or overview is None or dataset is None or model is None or assets is None:
        return None, report

    config = CardConfig(
        overview=overview,
        dataset=dataset,
        model=model,
        assets=assets,
        intended_use=intended_use,
        limitations=limitations or (),
        references=references or (),
        uncertainty=uncertainty,
        extra_sections=tuple(extra_sections),
        base_dir=str(base_dir),
    )
    return apply_defaults(config), report


def parse_config(path) -> CardConfig | ValidationReport:
    """Parse and validate a card config.

    Returns a fully defaulted CardConfig on success, otherwise a
    ValidationReport listing every violation. Raises MissingFile /
    YamlSyntaxError for problems below the schema level. Relative asset
    paths resolve against the config file's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    _reject_anchors(text)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise _syntax_error(exc) from exc
    config, report = _validate(data, path.parent)
    if config is None:
        return report
    return config


def validate_data(data, base_dir=".") -> ValidationReport:
    """Validation report for an already-loaded YAML mapping (used by tests and tools)."""
    _, report = _validate(data, Path(base_dir))
    return report


def dump_config(config: CardConfig) -> str:
    """Serialize back to YAML; parse_config on the result yields an equal config."""
    return yaml.safe_dump(config.to_dict(), sort_keys=False, allow_unicode=True)
