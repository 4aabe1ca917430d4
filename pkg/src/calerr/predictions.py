"""Core prediction containers and the score views that calibration metrics consume.

A model's output on an evaluation set is either an N x K matrix of class
probabilities (:class:`PredictionSet`) or an N x K matrix of raw logits
(:class:`LogitSet`).  Metrics never look at these matrices directly; they look
at flattened views made of (score, class_index, correct, datapoint_index)
records, built by :func:`max_prob_view` or :func:`full_prob_view`.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterator, Union

import numpy as np

# Tolerance for each probability row summing to 1.
PROB_SUM_TOL = 1e-6


class ValidationError(ValueError):
    """A prediction matrix or label vector violates its contract."""


def _check_labels(labels: np.ndarray, n_points: int, n_classes: int) -> None:
    if labels.ndim != 1:
        raise ValidationError(f"labels must be 1-D, got shape {labels.shape}")
    if labels.shape[0] != n_points:
        raise ValidationError(
            f"got {labels.shape[0]} labels for {n_points} prediction rows"
        )
    if n_points and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValidationError(
            f"labels must lie in [0, {n_classes - 1}], got range "
            f"[{labels.min()}, {labels.max()}]"
        )


@dataclasses.dataclass(frozen=True)
class PredictionSet:
    """Class-probability matrix with ground-truth labels.

    Parameters
    ----------
    probs : array-like, shape (n_points, n_classes)
        Row i holds the predicted class distribution for datapoint i.  Every
        entry must lie in [0, 1] and each row must sum to 1 within
        ``PROB_SUM_TOL``.  Rows are never renormalized implicitly; call
        :meth:`renormalized` to request that explicitly.
    labels : array-like, shape (n_points,)
        Integer class labels in ``range(n_classes)``.
    """

    probs: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        labels = np.array(self.labels, dtype=int)
        if probs.ndim != 2:
            raise ValidationError(f"probs must be 2-D, got shape {probs.shape}")
        n, k = probs.shape
        if n < 1:
            raise ValidationError("need at least one prediction row")
        if k < 2:
            raise ValidationError(f"need at least two classes, got {k}")
        if not np.all(np.isfinite(probs)):
            raise ValidationError("probs contain non-finite entries")
        if probs.min() < 0.0 or probs.max() > 1.0:
            raise ValidationError("probs must lie in [0, 1]")
        row_sums = probs.sum(axis=1)
        worst = np.argmax(np.abs(row_sums - 1.0))
        if abs(row_sums[worst] - 1.0) > PROB_SUM_TOL:
            raise ValidationError(
                f"row {worst} sums to {row_sums[worst]!r}, outside "
                f"1 +/- {PROB_SUM_TOL}"
            )
        _check_labels(labels, n, k)
        probs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", labels)

    @property
    def n_points(self) -> int:
        return self.probs.shape[0]

    @property
    def n_classes(self) -> int:
        return self.probs.shape[1]

    def renormalized(self) -> "PredictionSet":
        """Divide each row by its sum.  Rows summing to zero are an error."""
        sums = self.probs.sum(axis=1, keepdims=True)
        if np.any(sums == 0.0):
            raise ValidationError("cannot renormalize a row summing to zero")
        return PredictionSet(self.probs / sums, self.labels)


@dataclasses.dataclass(frozen=True)
class LogitSet:
    """Raw (pre-softmax) score matrix with ground-truth labels."""

    logits: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        logits = np.array(self.logits, dtype=float)
        labels = np.array(self.labels, dtype=int)
        if logits.ndim != 2:
            raise ValidationError(f"logits must be 2-D, got shape {logits.shape}")
        n, k = logits.shape
        if n < 1:
            raise ValidationError("need at least one logit row")
        if k < 2:
            raise ValidationError(f"need at least two classes, got {k}")
        if not np.all(np.isfinite(logits)):
            raise ValidationError("logits contain non-finite entries")
        _check_labels(labels, n, k)
        logits.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "labels", labels)

    @property
    def n_points(self) -> int:
        return self.logits.shape[0]

    @property
    def n_classes(self) -> int:
        return self.logits.shape[1]


PredictionsOrLogits = Union[PredictionSet, LogitSet]


@dataclasses.dataclass(frozen=True)
class ScoredPrediction:
    """One scored entry: a probability, the class it scores, and its outcome."""

    score: float
    class_index: int
    correct: bool
    datapoint_index: int


class ScoredPredictions:
    """Array-backed sequence of :class:`ScoredPrediction` records.

    Metrics operate on these flat views.  ``class_index`` is the predicted
    class in the max-probability view and the scored class in the
    full-probability view; ``correct`` marks whether that class is the true
    label of the originating datapoint.
    """

    __slots__ = ("scores", "class_index", "correct", "datapoint_index")

    def __init__(
        self,
        scores: np.ndarray,
        class_index: np.ndarray,
        correct: np.ndarray,
        datapoint_index: np.ndarray,
    ) -> None:
        self.scores = np.asarray(scores, dtype=float)
        self.class_index = np.asarray(class_index, dtype=int)
        self.correct = np.asarray(correct, dtype=bool)
        self.datapoint_index = np.asarray(datapoint_index, dtype=int)
        n = self.scores.shape[0]
        for arr in (self.class_index, self.correct, self.datapoint_index):
            if arr.shape != (n,):
                raise ValidationError("scored-prediction arrays must be parallel")

    def __len__(self) -> int:
        return self.scores.shape[0]

    def __getitem__(self, i: int) -> ScoredPrediction:
        return ScoredPrediction(
            score=float(self.scores[i]),
            class_index=int(self.class_index[i]),
            correct=bool(self.correct[i]),
            datapoint_index=int(self.datapoint_index[i]),
        )

    def __iter__(self) -> Iterator[ScoredPrediction]:
        return (self[i] for i in range(len(self)))

    def filter(self, mask: np.ndarray) -> "ScoredPredictions":
        """Subset by boolean mask, preserving order."""
        mask = np.asarray(mask, dtype=bool)
        return ScoredPredictions(
            self.scores[mask],
            self.class_index[mask],
            self.correct[mask],
            self.datapoint_index[mask],
        )


def row_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction for overflow safety."""
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax(logits: LogitSet) -> PredictionSet:
    """Convert logits to probabilities.  Preserves each row's argmax."""
    return PredictionSet(row_softmax(logits.logits), logits.labels)


def max_prob_view(p: PredictionSet) -> ScoredPredictions:
    """One record per datapoint: its top probability and predicted class.

    Argmax ties resolve to the lowest class index.
    """
    n = p.n_points
    cls = np.argmax(p.probs, axis=1)  # np.argmax takes the first maximum
    scores = p.probs[np.arange(n), cls]
    return ScoredPredictions(scores, cls, cls == p.labels, np.arange(n))


def full_prob_view(p: PredictionSet, threshold: float = 0.0) -> ScoredPredictions:
    """One record per (datapoint, class) entry, optionally thresholded.

    With ``threshold == 0`` all n_points * n_classes entries survive.  With
    ``threshold > 0`` only entries whose score is strictly above the threshold
    survive.  Records are ordered datapoint-major, class-minor.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValidationError(f"threshold must lie in [0, 1), got {threshold}")
    n, k = p.probs.shape
    scores = p.probs.ravel()
    class_index = np.tile(np.arange(k), n)
    datapoint_index = np.repeat(np.arange(n), k)
    correct = class_index == np.repeat(p.labels, k)
    view = ScoredPredictions(scores, class_index, correct, datapoint_index)
    if threshold > 0.0:
        view = view.filter(view.scores > threshold)
    return view


def split_validation(
    p: PredictionsOrLogits,
) -> tuple[PredictionsOrLogits, PredictionsOrLogits]:
    """Split into (fit half, eval half) by position, no shuffling.

    The fit half takes the first ceil(N / 2) rows, the eval half the rest.
    Callers that want a randomized split must permute beforehand.
    """
    n = p.n_points
    if n < 2:
        raise ValidationError(f"cannot split {n} predictions into two halves")
    cut = math.ceil(n / 2)
    if isinstance(p, LogitSet):
        return (
            LogitSet(p.logits[:cut], p.labels[:cut]),
            LogitSet(p.logits[cut:], p.labels[cut:]),
        )
    return (
        PredictionSet(p.probs[:cut], p.labels[:cut]),
        PredictionSet(p.probs[cut:], p.labels[cut:]),
    )
