"""Metric family indexing and the generalized scorer."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from calerr import (
    BinScheme,
    EmptyMeasurementError,
    MetricConfig,
    PredictionSet,
    all_configs,
    binned_stats,
    brier_score,
    gce,
    index_to_config,
    metric_index,
    named_metric,
)
from calerr.metrics import NAMED_METRICS

from conftest import random_prediction_set


class TestIndexing:
    def test_round_trip_all_32(self):
        for i in range(32):
            assert metric_index(index_to_config(i)) == i

    def test_axis_tuples_match_canonical_order(self):
        expected = oracle.all_variant_axes()
        for i, cfg in enumerate(all_configs()):
            assert cfg.axis_tuple() == expected[i]

    def test_named_map(self):
        assert NAMED_METRICS == {
            "ECE": 4,
            "CCECE": 0,
            "SCE": 8,
            "ACE": 24,
            "TACE": 26,
            "RMSCE": 21,
        }

    def test_named_metric_lookup(self):
        cfg = named_metric("ece")
        assert cfg.axis_tuple() == ("even", True, False, 0.0, "l1")
        with pytest.raises(ValueError, match="unknown metric"):
            named_metric("BRIER")

    def test_label_strings(self):
        assert index_to_config(0).label() == "('even', True, True, 0.0, 'l1')"
        assert (
            index_to_config(31).label()
            == "('adaptive', False, False, 0.01, 'l2')"
        )

    def test_out_of_range_index(self):
        with pytest.raises(ValueError):
            index_to_config(32)
        with pytest.raises(ValueError):
            index_to_config(-1)

    def test_off_grid_threshold_has_no_index(self):
        cfg = MetricConfig(BinScheme("even", 15), threshold=0.5)
        with pytest.raises(ValueError, match="off the standard grid"):
            metric_index(cfg)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MetricConfig(BinScheme("even", 15), norm="linf")
        with pytest.raises(ValueError):
            MetricConfig(BinScheme("even", 15), threshold=1.0)


class TestGce:
    def test_ece_hand_example(self, tiny_preds):
        # B=2: bin 1 holds all four max probs (0.8, 0.7, 0.6, 0.9);
        # acc 3/4, conf 0.75 -> ECE = 0
        score = gce(tiny_preds, named_metric("ECE", 2))
        assert score.value == pytest.approx(0.0, abs=1e-12)

    def test_ece_two_bin_example(self):
        # bins [0, .5) and [.5, 1]: three entries at .6 (2 correct),
        # one at .9 (correct) -> single occupied bin, gap |0.75 - 0.675|
        p = PredictionSet(
            np.array([[0.6, 0.4], [0.6, 0.4], [0.6, 0.4], [0.9, 0.1]]),
            np.array([0, 0, 1, 0]),
        )
        score = gce(p, named_metric("ECE", 2))
        assert score.value == pytest.approx(abs(0.75 - 0.675), abs=1e-12)

    def test_threshold_ignored_under_max_probs(self, rng):
        p = random_prediction_set(rng)
        for base in (0, 1, 4, 5, 16, 17, 20, 21):
            with_zero = gce(p, index_to_config(base, 5)).value
            with_eps = gce(p, index_to_config(base + 2, 5)).value
            assert with_zero == with_eps

    def test_per_class_mean_is_value(self, rng):
        p = random_prediction_set(rng)
        score = gce(p, named_metric("SCE", 5))
        assert score.per_class is not None
        mean = sum(score.per_class.values()) / len(score.per_class)
        assert score.value == pytest.approx(mean, abs=1e-12)

    def test_unconditional_score_has_no_per_class(self, tiny_preds):
        assert gce(tiny_preds, named_metric("ECE")).per_class is None

    def test_empty_view_raises(self):
        p = PredictionSet(np.array([[0.6, 0.4]]), np.array([0]))
        cfg = MetricConfig(
            BinScheme("even", 10), max_probs=False, threshold=0.7
        )
        with pytest.raises(EmptyMeasurementError):
            gce(p, cfg)

    def test_empty_class_excluded_from_mean(self):
        # class 2's column is all zeros; with a positive threshold its pool
        # empties and only classes 0 and 1 are averaged
        p = PredictionSet(
            np.array([[0.7, 0.3, 0.0], [0.2, 0.8, 0.0]]),
            np.array([0, 1]),
        )
        cfg = MetricConfig(
            BinScheme("even", 5),
            max_probs=False,
            class_conditional=True,
            threshold=0.01,
        )
        score = gce(p, cfg)
        assert sorted(score.per_class) == [0, 1]

    def test_unweighted_l2_matches_oracle(self, rng):
        p = random_prediction_set(rng)
        cfg = MetricConfig(BinScheme("even", 5), norm="l2")
        got = gce(p, cfg, weighted_l2=False).value
        ref = oracle.brute_force_gce(
            p.probs, p.labels, "even", True, False, 0.0, "l2", 5,
            weighted_l2=False,
        )
        assert got == pytest.approx(ref, abs=1e-12)

    def test_binned_stats_tags_classes(self, tiny_preds):
        cfg = MetricConfig(BinScheme("even", 2), class_conditional=True)
        stats = binned_stats(tiny_preds, cfg)
        assert {s.class_index for s in stats} == {0, 1}

    def test_binned_stats_placeholder_for_empty_class(self):
        p = PredictionSet(
            np.array([[0.7, 0.3, 0.0], [0.2, 0.8, 0.0]]),
            np.array([0, 1]),
        )
        cfg = MetricConfig(
            BinScheme("even", 5),
            max_probs=False,
            class_conditional=True,
            threshold=0.01,
        )
        stats = binned_stats(p, cfg)
        placeholder = [s for s in stats if s.class_index == 2]
        assert len(placeholder) == 1
        assert placeholder[0].count == 0


class TestBrier:
    def test_hand_value(self):
        p = PredictionSet(np.array([[0.8, 0.2]]), np.array([0]))
        assert brier_score(p) == pytest.approx(0.04 + 0.04, abs=1e-12)

    def test_perfect_prediction_is_zero(self):
        p = PredictionSet(np.array([[1.0, 0.0]]), np.array([0]))
        assert brier_score(p) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_scores_bounded_and_deterministic(seed):
    rng = np.random.default_rng(seed)
    p = random_prediction_set(rng)
    b = int(rng.integers(1, 6))
    for cfg in all_configs(b):
        first = gce(p, cfg).value
        assert 0.0 <= first <= 1.0
        assert gce(p, cfg).value == first


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_matches_brute_force_oracle(seed):
    rng = np.random.default_rng(seed)
    p = random_prediction_set(rng)
    b = int(rng.integers(1, 6))
    for cfg in all_configs(b):
        got = gce(p, cfg).value
        binning, mp, cc, thr, norm = cfg.axis_tuple()
        ref = oracle.brute_force_gce(
            p.probs, p.labels, binning, mp, cc, thr, norm, b
        )
        assert got == pytest.approx(ref, abs=1e-10)
