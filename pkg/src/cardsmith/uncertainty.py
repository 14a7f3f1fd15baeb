"""95% confidence intervals for every card metric.

Primary method: seeded percentile bootstrap (case resampling of prediction
records), which applies uniformly to every metric including F1. Wilson score
intervals serve as the analytic cross-check for proportion-type metrics
(accuracy). Degenerate metrics inside a resample follow the same
zero-denominator convention as the metrics module.

Determinism contract: identical (log, seed, replicates, level) always
reproduces bit-identical intervals; see _kernels for the substream scheme.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CountExceedsN, EmptyLog, InvalidLevel, TooFewReplicates
from .ingest import PredictionLog
from .metrics import MetricSet, metric_names

# z for 95% pinned to 6 decimals so intervals do not depend on any
# statistical library's quantile routine.
Z_95 = 1.959964

DEFAULT_LEVEL = 0.95
DEFAULT_REPLICATES = 2000
DEFAULT_SEED = 42
MIN_REPLICATES = 100


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float = DEFAULT_LEVEL
    method: str = "bootstrap_percentile"

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class CIReport:
    """Bootstrap intervals keyed by canonical metric name, plus the Wilson cross-check."""

    intervals: dict[str, ConfidenceInterval]
    accuracy_wilson: ConfidenceInterval
    level: float
    bootstrap_replicates: int
    seed: int

    @property
    def accuracy_ci(self) -> ConfidenceInterval:
        return self.intervals["accuracy"]


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise InvalidLevel(f"confidence level must be in (0, 1), got {level!r}")


def _z_for(level: float) -> float:
    if level == 0.95:
        return Z_95
    # stdlib inverse normal CDF; only non-default levels depend on it
    return statistics.NormalDist().inv_cdf(0.5 + level / 2.0)


def wilson_interval(successes: int, n: int, level: float = DEFAULT_LEVEL) -> ConfidenceInterval:
    """Wilson score interval for a binomial proportion, clamped to [0, 1]."""
    _check_level(level)
    if n < 1:
        raise CountExceedsN(f"n must be positive, got {n}")
    if not 0 <= successes <= n:
        raise CountExceedsN(f"successes={successes} outside [0, n={n}]")
    z = _z_for(level)
    p_hat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p_hat + z2 / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p_hat * (1 - p_hat) / n + z2 / (4 * n * n))
    lower = max(0.0, center - half)
    upper = min(1.0, center + half)
    # at the boundaries the endpoints are algebraically exact; drop the
    # floating-point residue so p_hat is always contained
    if successes == 0:
        lower = 0.0
    if successes == n:
        upper = 1.0
    return ConfidenceInterval(lower=lower, upper=upper, level=level, method="wilson")


def _log_arrays(log: PredictionLog) -> tuple[np.ndarray, np.ndarray]:
    n = len(log.records)
    t = np.fromiter((r.true_label for r in log.records), dtype=np.int64, count=n)
    p = np.fromiter((r.predicted_label for r in log.records), dtype=np.int64, count=n)
    return t, p


def _percentile_interval(column: np.ndarray, level: float) -> tuple[float, float]:
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(column, [alpha, 1.0 - alpha], method="linear")
    return float(lo), float(hi)


def bootstrap_ci(
    log: PredictionLog,
    statistic: str,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = DEFAULT_SEED,
    level: float = DEFAULT_LEVEL,
) -> ConfidenceInterval:
    """Percentile bootstrap interval for one metric (canonical name).

    Resample indices depend only on (seed, replicate, n), so every statistic
    evaluated at the same seed sees the same resamples.
    """
    _check_level(level)
    if replicates < MIN_REPLICATES:
        raise TooFewReplicates(f"replicates must be >= {MIN_REPLICATES}, got {replicates}")
    if not log.records:
        raise EmptyLog("cannot bootstrap an empty prediction log")
    k = log.label_map.k
    names = metric_names(k)
    if statistic not in names:
        raise KeyError(f"unknown statistic {statistic!r}; expected one of {names}")
    t, p = _log_arrays(log)
    stats = _kernels.bootstrap_stats(t, p, k, replicates, seed)
    lo, hi = _percentile_interval(stats[:, names.index(statistic)], level)
    return ConfidenceInterval(lo, hi, level, "bootstrap_percentile")


def build_ci_report(
    log: PredictionLog,
    metrics: MetricSet,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = DEFAULT_SEED,
    level: float = DEFAULT_LEVEL,
) -> CIReport:
    """Bootstrap CIs for accuracy, macro and per-class metrics in one pass,
    plus the Wilson interval on accuracy as an analytic cross-check."""
    _check_level(level)
    if replicates < MIN_REPLICATES:
        raise TooFewReplicates(f"replicates must be >= {MIN_REPLICATES}, got {replicates}")
    if not log.records:
        raise EmptyLog("cannot bootstrap an empty prediction log")

    k = log.label_map.k
    t, p = _log_arrays(log)
    stats = _kernels.bootstrap_stats(t, p, k, replicates, seed)
    intervals = {}
    for col, name in enumerate(metric_names(k)):
        lo, hi = _percentile_interval(stats[:, col], level)
        intervals[name] = ConfidenceInterval(lo, hi, level, "bootstrap_percentile")

    n = len(log.records)
    correct = int((t == p).sum())
    wilson = wilson_interval(correct, n, level)
    return CIReport(
        intervals=intervals,
        accuracy_wilson=wilson,
        level=level,
        bootstrap_replicates=replicates,
        seed=seed,
    )


def ci_document(report: CIReport) -> dict:
    """The ``ci`` block of the metrics JSON document."""
    doc = {}
    for name, ival in report.intervals.items():
        doc[name] = {"lower": ival.lower, "upper": ival.upper, "method": ival.method}
    doc["accuracy_wilson"] = {
        "lower": report.accuracy_wilson.lower,
        "upper": report.accuracy_wilson.upper,
        "method": report.accuracy_wilson.method,
    }
    doc["meta"] = {
        "seed": report.seed,
        "replicates": report.bootstrap_replicates,
        "level": report.level,
    }
    return doc
