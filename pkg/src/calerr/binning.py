"""Score binning: even-width and adaptive equal-count partitions of [0, 1].

Even binning fixes edges at i / B and assigns a score to the half-open bin
[edge_b, edge_{b+1}), with the last bin closed so a score of exactly 1.0
lands in bin B - 1.  Adaptive binning sorts the scores (stably, so ties keep
their original order) and cuts the sorted sequence into B runs whose sizes
differ by at most one; when B does not divide N the first N mod B bins take
the extra element.  Adaptive edges are reported as midpoints between the
boundary scores of neighboring runs, with the outer edges pinned to 0 and 1.

Bin membership for the adaptive scheme is decided by sorted position, not by
looking scores up against the midpoint edges: under heavy ties several runs
can share identical boundary scores, and position is what keeps run sizes
balanced.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .predictions import ScoredPredictions

BIN_KINDS = ("even", "adaptive")
DEFAULT_BINS = 15


@dataclasses.dataclass(frozen=True)
class BinScheme:
    """A binning rule: the kind of partition and how many bins."""

    kind: str
    n_bins: int = DEFAULT_BINS

    def __post_init__(self) -> None:
        if self.kind not in BIN_KINDS:
            raise ValueError(f"kind must be one of {BIN_KINDS}, got {self.kind!r}")
        if self.n_bins < 1:
            raise ValueError(f"n_bins must be >= 1, got {self.n_bins}")


@dataclasses.dataclass(frozen=True)
class BinStats:
    """Per-bin summary: interval, population, mean outcome, mean score.

    Empty bins carry accuracy = confidence = 0.0 by convention and are
    distinguishable by ``count == 0``.  ``class_index`` is set when the bin
    belongs to a class-conditional pool, else None.
    """

    lower: float
    upper: float
    count: int
    accuracy: float
    confidence: float
    class_index: int | None = None

    @property
    def gap(self) -> float:
        return self.accuracy - self.confidence


def even_edges(n_bins: int) -> np.ndarray:
    """Edges i / n_bins for i = 0..n_bins, each correctly rounded."""
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    edges = np.arange(n_bins + 1, dtype=float) / n_bins
    edges[-1] = 1.0
    return edges


def assign_even_bins(scores: np.ndarray, n_bins: int) -> np.ndarray:
    """Bin index in [0, n_bins) for each score in [0, 1]."""
    edges = even_edges(n_bins)
    idx = np.searchsorted(edges, scores, side="right") - 1
    return np.clip(idx, 0, n_bins - 1)


def adaptive_counts(n_scores: int, n_bins: int) -> np.ndarray:
    """Run lengths for equal-count binning; first N mod B runs get the extra."""
    base, extra = divmod(n_scores, n_bins)
    return base + (np.arange(n_bins) < extra).astype(int)


def adaptive_edges(scores: np.ndarray, n_bins: int) -> np.ndarray:
    """Midpoint edges for equal-count bins over the given scores.

    The first edge is 0, the last is 1, and interior edge b is the midpoint
    of the last score of run b and the first score of run b + 1 (in sorted
    order).  Runs of size zero (more bins than scores) collapse their edges
    onto the neighboring boundary.
    """
    s = np.sort(np.asarray(scores, dtype=float))
    n = s.shape[0]
    if n == 0:
        raise ValueError("adaptive edges need at least one score")
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    boundaries = np.cumsum(adaptive_counts(n, n_bins))
    edges = np.empty(n_bins + 1, dtype=float)
    edges[0] = 0.0
    edges[-1] = 1.0
    for b in range(n_bins - 1):
        c = boundaries[b]
        if c <= 0:
            edges[b + 1] = 0.0
        elif c >= n:
            edges[b + 1] = 1.0
        else:
            edges[b + 1] = 0.5 * (s[c - 1] + s[c])
    return edges


def bin_stats(preds: ScoredPredictions, scheme: BinScheme) -> list[BinStats]:
    """Partition a score view into bins and summarize each bin.

    Even schemes may produce empty bins (count 0, accuracy and confidence 0).
    Adaptive schemes need at least one prediction; membership follows sorted
    position with stable tie order.
    """
    b = scheme.n_bins
    scores = preds.scores
    correct = preds.correct.astype(float)
    if scheme.kind == "even":
        edges = even_edges(b)
        idx = assign_even_bins(scores, b)
        counts = np.bincount(idx, minlength=b)
        conf_sums = np.bincount(idx, weights=scores, minlength=b)
        acc_sums = np.bincount(idx, weights=correct, minlength=b)
    else:
        n = scores.shape[0]
        if n == 0:
            raise ValueError("adaptive binning needs at least one prediction")
        order = np.argsort(scores, kind="stable")
        counts = adaptive_counts(n, b)
        edges = adaptive_edges(scores, b)
        conf_sums = np.zeros(b)
        acc_sums = np.zeros(b)
        stops = np.cumsum(counts)
        starts = stops - counts
        for i in range(b):
            members = order[starts[i] : stops[i]]
            conf_sums[i] = scores[members].sum()
            acc_sums[i] = correct[members].sum()
    out = []
    for i in range(b):
        c = int(counts[i])
        acc = acc_sums[i] / c if c else 0.0
        conf = conf_sums[i] / c if c else 0.0
        out.append(
            BinStats(
                lower=float(edges[i]),
                upper=float(edges[i + 1]),
                count=c,
                accuracy=float(acc),
                confidence=float(conf),
            )
        )
    return out
