import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairshift.core import Dataset
from fairshift.errors import EmptyConditioningCell, TooFewDefinedBins, TooShort
from fairshift.metrics import (
    CurveEstimate,
    Metric,
    Orientation,
    error_rate,
    estimate_conditional,
    group_rate,
    single_crossing_check,
    statistical_tol,
    unfairness,
    unimodality_check,
)
from fairshift.threshold_lab import ThresholdClassifier

ALWAYS_ONE = ThresholdClassifier(0.0)
ALWAYS_ZERO = ThresholdClassifier(2.0)


def test_error_rate_constant_classifiers():
    ds = Dataset([0, 1, 0, 1], [1, 1, 1, 1], [[0.1], [0.2], [0.3], [0.4]])
    assert error_rate(ds, ALWAYS_ONE) == 0.0
    assert error_rate(ds, ALWAYS_ZERO) == 1.0


def test_error_rate_counts():
    ds = Dataset([0, 0, 1, 1], [1, 1, 1, 0], [[0.6], [0.7], [0.8], [0.9]])
    # theta=0.5 classifies all 1; one label is 0
    assert error_rate(ds, ThresholdClassifier(0.5)) == 0.25


def test_group_rate_tpr_counting():
    ds = Dataset([1, 1], [1, 1], [[0.9], [0.1]])
    assert group_rate(ds, ThresholdClassifier(0.5), Metric.TPR, 1) == 0.5


def test_group_rate_empty_cell():
    ds = Dataset([0, 1], [1, 0], [[0.1], [0.9]])
    with pytest.raises(EmptyConditioningCell):
        group_rate(ds, ALWAYS_ONE, Metric.FPR, 0)  # group 0 has no y=0


def test_unfairness_constant_classifier():
    ds = Dataset([0, 1, 0, 1], [0, 1, 1, 0], [[0.1], [0.2], [0.3], [0.4]])
    assert unfairness(ds, ALWAYS_ONE, Metric.PR) == 0.0


def test_unfairness_hand_counts():
    # group 1 rates: PR = 0.7 via 7/10 positives; group 0: 0.4 via 4/10
    x1 = [[0.9]] * 7 + [[0.1]] * 3
    x0 = [[0.9]] * 4 + [[0.1]] * 6
    ds = Dataset([1] * 10 + [0] * 10, [1] * 20, x1 + x0)
    assert unfairness(ds, ThresholdClassifier(0.5), Metric.PR) == pytest.approx(0.3)


def test_unfairness_group_swap_invariant():
    rng = np.random.default_rng(0)
    g = rng.integers(0, 2, 60)
    y = rng.integers(0, 2, 60)
    x = rng.uniform(0, 1, (60, 1))
    f = ThresholdClassifier(0.45)
    for metric in Metric:
        ds = Dataset(g, y, x)
        swapped = Dataset(1 - g, y, x)
        assert unfairness(ds, f, metric) == pytest.approx(unfairness(swapped, f, metric))


def test_rates_bounded():
    rng = np.random.default_rng(1)
    for seed in range(5):
        g = rng.integers(0, 2, 40)
        y = rng.integers(0, 2, 40)
        ds = Dataset(g, y, rng.uniform(0, 1, (40, 1)))
        f = ThresholdClassifier(rng.uniform(0, 1))
        assert 0.0 <= error_rate(ds, f) <= 1.0
        try:
            for metric in Metric:
                assert 0.0 <= unfairness(ds, f, metric) <= 1.0
        except EmptyConditioningCell:
            pass


def test_estimate_conditional_two_bins():
    ds = Dataset([0, 0], [0, 1], [[0.1], [0.9]])
    curve = estimate_conditional(ds, "label", 0, bins=2)
    assert curve.values == (0.0, 1.0)
    assert curve.counts == (1, 1)


def test_estimate_conditional_constant_group():
    ds = Dataset([1, 1, 1], [0, 1, 0], [[0.1], [0.5], [0.9]])
    curve = estimate_conditional(ds, "group", 0, bins=3)
    assert all(v == 1.0 for v, c in zip(curve.values, curve.counts) if c > 0)


def test_estimate_conditional_hand_counts():
    # y=1 records: x=.1 (g1), .2 (g1), .3 (g0), .6 (g0), .7 (g1)
    ds = Dataset(
        [1, 1, 0, 0, 1, 1],
        [1, 1, 1, 1, 1, 0],
        [[0.1], [0.2], [0.3], [0.6], [0.7], [0.3]],
    )
    curve = estimate_conditional(ds, "group", 0, bins=2, condition=1)
    assert curve.counts == (3, 2)
    assert curve.values[0] == pytest.approx(2 / 3)
    assert curve.values[1] == pytest.approx(1 / 2)


def test_estimate_conditional_undefined_bins_flagged():
    ds = Dataset([0, 1], [0, 1], [[0.05], [0.08]])
    curve = estimate_conditional(ds, "label", 0, bins=10)
    assert curve.counts[0] == 2 and sum(curve.counts) == 2
    assert np.isnan(curve.values[5])
    assert curve.to_dict()["values"][5] is None


def _curve(values, grid=None):
    values = tuple(values)
    grid = tuple(grid) if grid else tuple((i + 0.5) / len(values) for i in range(len(values)))
    return CurveEstimate(grid, values, tuple(1 for _ in values))


def test_single_crossing_monotone():
    report = single_crossing_check(_curve([0.1, 0.3, 0.5, 0.7, 0.9]), 0.5, tol=0.0)
    assert report.crossing_count == 1
    assert report.holds_approximately
    assert report.max_violation == 0.0


def test_single_crossing_bump():
    report = single_crossing_check(_curve([0.2, 0.8, 0.2]), 0.5, tol=0.0)
    assert report.crossing_count == 2
    assert report.max_violation == pytest.approx(0.3)
    assert not report.holds_approximately
    assert single_crossing_check(_curve([0.2, 0.8, 0.2]), 0.5, tol=0.3).holds_approximately


def test_single_crossing_constant_equal():
    report = single_crossing_check(_curve([0.5, 0.5, 0.5]), 0.5, tol=0.0)
    assert report.crossing_count == 0
    assert report.holds_approximately


def test_single_crossing_needs_defined_bins():
    curve = CurveEstimate((0.25, 0.75), (0.1, np.nan), (1, 0))
    with pytest.raises(TooFewDefinedBins):
        single_crossing_check(curve, 0.5, tol=0.0)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=15), st.floats(0.05, 0.95))
def test_single_crossing_monotone_at_most_one(values, v):
    report = single_crossing_check(_curve(sorted(values)), v, tol=0.0)
    assert report.crossing_count <= 1
    assert report.holds_approximately


def test_unimodality_valley():
    report = unimodality_check([3, 1, 2, 4])
    assert report.orientation == Orientation.NEGATIVELY_UNIMODAL
    assert report.mode_index == 1
    assert report.max_violation == 0.0


def test_unimodality_neither():
    report = unimodality_check([1, 4, 2, 5], tol=0.0)
    assert report.orientation == Orientation.NEITHER
    assert report.max_violation == pytest.approx(2.0)


def test_unimodality_monotone_tie_rule():
    report = unimodality_check([1, 2, 3, 4])
    assert report.orientation == Orientation.POSITIVELY_UNIMODAL
    assert report.mode_index == 3


def test_unimodality_too_short():
    with pytest.raises(TooShort):
        unimodality_check([1, 2])


def _split_oracle(values):
    """Exhaustive scan: is there a mode splitting the sequence into two
    monotone halves, for either orientation?"""

    def mono(seq, up):
        return all(b >= a if up else b <= a for a, b in zip(seq, seq[1:]))

    n = len(values)
    pos = any(mono(values[: r + 1], True) and mono(values[r:], False) for r in range(n))
    neg = any(mono(values[: r + 1], False) and mono(values[r:], True) for r in range(n))
    return pos or neg


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=3, max_size=12))
def test_unimodality_zero_violation_iff_split_exists(values):
    report = unimodality_check(values, tol=0.0)
    yes = _split_oracle(values)
    assert (report.max_violation == 0.0) == yes
    assert (report.orientation != Orientation.NEITHER) == yes


def test_unimodality_hint_selects_orientation():
    flat = [1.0, 1.0, 1.0]
    hinted = unimodality_check(flat, Orientation.NEGATIVELY_UNIMODAL)
    assert hinted.orientation == Orientation.NEGATIVELY_UNIMODAL
    assert unimodality_check(flat).orientation == Orientation.POSITIVELY_UNIMODAL


def test_statistical_tol():
    assert statistical_tol(10000) == pytest.approx(0.02)
