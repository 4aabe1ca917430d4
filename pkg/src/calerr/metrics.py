"""Generalized calibration error: one scoring engine, 32 metric variants.

A calibration metric is determined by five independent axes:

==================  =========================  ==========================
axis                values                     effect
==================  =========================  ==========================
binning             even | adaptive            how [0, 1] is partitioned
max_probs           True | False               score only each datapoint's
                                               top prediction, or every
                                               (datapoint, class) entry
class_conditional   True | False               bin each class's pool
                                               separately, then average
threshold           0.0 | 0.01 (any in [0,1))  drop full-view entries with
                                               score <= threshold
norm                l1 | l2                    per-pool aggregation
==================  =========================  ==========================

Within one pool of scored predictions the binned error is

    l1:  sum_b (n_b / N_pool) * |acc_b - conf_b|
    l2:  sqrt( sum_b (n_b / N_pool) * (acc_b - conf_b)^2 )

and a class-conditional metric averages the pool errors evenly over the
classes that still hold at least one prediction.  Familiar metrics are
points in this grid: ECE is (even, True, False, 0.0, l1), SCE is
(even, False, True, 0.0, l1), ACE is (adaptive, False, True, 0.0, l1),
TACE adds the 0.01 threshold to ACE, and RMSCE is
(adaptive, True, False, 0.0, l2).

The threshold axis only acts on the full-probability view; a max_probs
metric ignores it (a top probability is never below 1 / n_classes, so the
small standard threshold could not drop it anyway).

Variants are indexed 0..31 by nesting the axes with binning outermost and
norm innermost; see :func:`metric_index`.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Mapping

import numpy as np

from .binning import BIN_KINDS, DEFAULT_BINS, BinScheme, BinStats, bin_stats
from .predictions import (
    PredictionSet,
    ScoredPredictions,
    full_prob_view,
    max_prob_view,
)

NORMS = ("l1", "l2")

# Axis orders behind the 0..31 index. Within each axis the listed order is
# the nesting order: even before adaptive, True before False, 0.0 before
# 0.01, l1 before l2.
_BINNING_ORDER = BIN_KINDS
_FLAG_ORDER = (True, False)
_THRESHOLD_ORDER = (0.0, 0.01)
_NORM_ORDER = NORMS


class EmptyMeasurementError(ValueError):
    """No scored predictions survive to be measured (never reported as 0)."""


@dataclasses.dataclass(frozen=True)
class MetricConfig:
    """One point in the five-axis metric family."""

    binning: BinScheme
    max_probs: bool = True
    class_conditional: bool = False
    threshold: float = 0.0
    norm: str = "l1"

    def __post_init__(self) -> None:
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}, got {self.norm!r}")
        if not 0.0 <= self.threshold < 1.0:
            raise ValueError(f"threshold must lie in [0, 1), got {self.threshold}")

    def axis_tuple(self) -> tuple:
        """(binning kind, max_probs, class_conditional, threshold, norm)."""
        return (
            self.binning.kind,
            self.max_probs,
            self.class_conditional,
            self.threshold,
            self.norm,
        )

    def label(self) -> str:
        """Canonical printable form, e.g. ``('even', True, False, 0.0, 'l1')``."""
        return repr(self.axis_tuple())


@dataclasses.dataclass(frozen=True)
class CalibrationScore:
    """A measured calibration error plus its provenance."""

    value: float
    config: MetricConfig
    per_class: Mapping[int, float] | None = None


# Named metrics as points in the family. Values are indices under
# metric_index with the default bin count.
NAMED_METRICS = {
    "ECE": 4,
    "CCECE": 0,
    "SCE": 8,
    "ACE": 24,
    "TACE": 26,
    "RMSCE": 21,
}


def metric_index(cfg: MetricConfig) -> int:
    """Position of a config in the canonical 0..31 enumeration.

    Nesting order, outermost first: binning, max_probs, class_conditional,
    threshold, norm.  Only thresholds on the standard grid (0.0, 0.01) are
    indexable; other configs are valid to score but have no index.
    """
    if cfg.threshold not in _THRESHOLD_ORDER:
        raise ValueError(
            f"threshold {cfg.threshold} is off the standard grid {_THRESHOLD_ORDER}"
        )
    return (
        _BINNING_ORDER.index(cfg.binning.kind) * 16
        + _FLAG_ORDER.index(cfg.max_probs) * 8
        + _FLAG_ORDER.index(cfg.class_conditional) * 4
        + _THRESHOLD_ORDER.index(cfg.threshold) * 2
        + _NORM_ORDER.index(cfg.norm)
    )


def index_to_config(index: int, n_bins: int = DEFAULT_BINS) -> MetricConfig:
    """Inverse of :func:`metric_index` at a chosen bin count."""
    if not 0 <= index < 32:
        raise ValueError(f"metric index must lie in [0, 32), got {index}")
    return MetricConfig(
        binning=BinScheme(_BINNING_ORDER[index // 16], n_bins),
        max_probs=_FLAG_ORDER[(index // 8) % 2],
        class_conditional=_FLAG_ORDER[(index // 4) % 2],
        threshold=_THRESHOLD_ORDER[(index // 2) % 2],
        norm=_NORM_ORDER[index % 2],
    )


def all_configs(n_bins: int = DEFAULT_BINS) -> list[MetricConfig]:
    """All 32 variants in index order at one bin count."""
    return [index_to_config(i, n_bins) for i in range(32)]


def named_metric(name: str, n_bins: int = DEFAULT_BINS) -> MetricConfig:
    """Config for a named metric (ECE, SCE, ACE, TACE, RMSCE, CCECE)."""
    key = name.upper()
    if key not in NAMED_METRICS:
        raise ValueError(
            f"unknown metric {name!r}; known: {sorted(NAMED_METRICS)}"
        )
    return index_to_config(NAMED_METRICS[key], n_bins)


def _view(p: PredictionSet, cfg: MetricConfig) -> ScoredPredictions:
    if cfg.max_probs:
        return max_prob_view(p)
    return full_prob_view(p, cfg.threshold)


def binned_stats(p: PredictionSet, cfg: MetricConfig) -> list[BinStats]:
    """The exact per-bin stats the metric aggregates, class-tagged if conditional.

    Class-conditional configs emit each class's bins tagged with that class.
    A class whose pool is empty after thresholding contributes a single
    zero-count placeholder bin spanning [0, 1] so downstream consumers see
    the class flagged rather than silently missing.
    """
    view = _view(p, cfg)
    if len(view) == 0:
        raise EmptyMeasurementError(
            f"no predictions survive threshold {cfg.threshold}"
        )
    if not cfg.class_conditional:
        return bin_stats(view, cfg.binning)
    out: list[BinStats] = []
    for k in range(p.n_classes):
        pool = view.filter(view.class_index == k)
        if len(pool) == 0:
            out.append(
                BinStats(0.0, 1.0, 0, 0.0, 0.0, class_index=k)
            )
            continue
        for st in bin_stats(pool, cfg.binning):
            out.append(dataclasses.replace(st, class_index=k))
    return out


def _pool_error(stats: list[BinStats], norm: str, weighted_l2: bool) -> float:
    total = sum(st.count for st in stats)
    if norm == "l1":
        return sum(st.count / total * abs(st.gap) for st in stats if st.count)
    if weighted_l2:
        return math.sqrt(
            sum(st.count / total * st.gap**2 for st in stats if st.count)
        )
    return math.sqrt(sum(st.gap**2 for st in stats if st.count))


def gce(
    p: PredictionSet, cfg: MetricConfig, *, weighted_l2: bool = True
) -> CalibrationScore:
    """Score a prediction set under one metric variant.

    The pipeline is: build the score view (top probability per datapoint, or
    every entry above the threshold), split it into per-class pools if the
    config is class-conditional, bin each pool under the config's scheme,
    aggregate each pool's |accuracy - confidence| gaps under the config's
    norm, and average evenly over the classes that kept at least one
    prediction.  Empty bins carry zero weight.  If thresholding empties the
    whole view this raises :class:`EmptyMeasurementError` rather than
    reporting a perfect 0.

    ``weighted_l2`` selects the bin-weighted root mean square for l2 (the
    shipped convention: sqrt of the count-weighted mean squared gap).  Pass
    ``weighted_l2=False`` for the plain root of the summed squared gaps over
    occupied bins, provided for comparison only.
    """
    stats = binned_stats(p, cfg)
    if not cfg.class_conditional:
        return CalibrationScore(
            value=_pool_error(stats, cfg.norm, weighted_l2), config=cfg
        )
    by_class: dict[int, list[BinStats]] = {}
    for st in stats:
        by_class.setdefault(st.class_index, []).append(st)
    per_class = {}
    for k, pool_stats in sorted(by_class.items()):
        if sum(st.count for st in pool_stats) == 0:
            continue  # class empty after thresholding: excluded from the mean
        per_class[k] = _pool_error(pool_stats, cfg.norm, weighted_l2)
    if not per_class:
        raise EmptyMeasurementError(
            f"every class pool is empty at threshold {cfg.threshold}"
        )
    value = sum(per_class.values()) / len(per_class)
    return CalibrationScore(value=value, config=cfg, per_class=per_class)


def brier_score(p: PredictionSet) -> float:
    """Mean squared distance between probability rows and one-hot labels."""
    onehot = np.zeros_like(p.probs)
    onehot[np.arange(p.n_points), p.labels] = 1.0
    return float(np.mean(np.sum((p.probs - onehot) ** 2, axis=1)))
