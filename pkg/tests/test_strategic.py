import math

import numpy as np
import pytest

from fairshift.core import Dataset
from fairshift.errors import ContractError, DimensionMismatch, NonUnitNormal
from fairshift.linear_lab import LinearClassifier
from fairshift.metrics import Metric
from fairshift.strategic import (
    AbsPowerCost,
    Budget,
    L2Cost,
    agent_utility,
    best_response_linear,
    best_response_threshold,
    best_responses,
    fairness_decomposition,
    induce_dataset,
    manipulable_set,
)
from fairshift.threshold_lab import ThresholdClassifier


def test_budget_validation():
    with pytest.raises(ContractError):
        Budget(-0.1)
    assert Budget(math.inf).is_infinite


def test_cost_models_feature_monotone():
    rng = np.random.default_rng(0)
    for cost in (AbsPowerCost(1), AbsPowerCost(2), AbsPowerCost(3)):
        x = rng.uniform(0, 1, 200)
        small = rng.uniform(0, 0.5, 200)
        large = small + rng.uniform(0, 0.5, 200)
        assert np.all(cost.cost(x, x + small) <= cost.cost(x, x + large))
    l2 = L2Cost()
    a = rng.uniform(0, 1, (100, 3))
    d = rng.normal(size=(100, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r1 = rng.uniform(0, 1, 100)
    r2 = r1 + rng.uniform(0, 1, 100)
    assert np.all(l2.cost(a, a + r1[:, None] * d) <= l2.cost(a, a + r2[:, None] * d))


def test_best_response_threshold_cases():
    stay = best_response_threshold(0.8, 0.5, AbsPowerCost(1), 1.0)
    assert not stay.moved and stay.reported == (0.8,) and stay.cost_paid == 0.0

    move = best_response_threshold(0.4, 0.5, AbsPowerCost(1), 0.2)
    assert move.moved and move.reported == (0.5,)
    assert move.cost_paid == pytest.approx(0.1)

    far = best_response_threshold(0.1, 0.5, AbsPowerCost(1), 0.2)
    assert not far.moved and far.reported == (0.1,)


def test_best_response_linear_axis_projection():
    br = best_response_linear((0.0, 0.0), (1.0, 0.0), 0.5, 1.0)
    assert br.moved
    assert br.reported[0] == pytest.approx(0.5, abs=1e-9)
    assert br.reported[1] == 0.0
    assert br.cost_paid == pytest.approx(0.5)


def test_best_response_linear_already_positive():
    br = best_response_linear((0.6, 0.2), (1.0, 0.0), 0.5, 1.0)
    assert not br.moved and br.reported == (0.6, 0.2)


def test_best_response_linear_requires_unit_normal():
    with pytest.raises(NonUnitNormal):
        best_response_linear((0.0, 0.0), (1.0, 1.0), 0.5, 1.0)


def test_best_response_linear_vs_grid_oracle():
    # brute force: million-point grid along the boundary line
    rng = np.random.default_rng(7)
    ang = rng.uniform(0, 2 * np.pi)
    w = np.array([np.cos(ang), np.sin(ang)])
    x = rng.uniform(0, 1, 2)
    theta = float(x @ w) + 0.3
    br = best_response_linear(x, w, theta, budget=2.0)
    assert br.moved
    tangent = np.array([-w[1], w[0]])
    ts = np.linspace(-4, 4, 1_000_000)
    points = theta * w[None, :] + ts[:, None] * tangent[None, :]
    oracle = float(np.min(np.linalg.norm(points - x, axis=1)))
    assert abs(br.cost_paid - oracle) <= 1e-3
    assert abs(np.dot(br.reported, w) - theta) <= 1e-9


def test_best_response_linear_grid_oracle_3d():
    rng = np.random.default_rng(11)
    w = rng.normal(size=3)
    w /= np.linalg.norm(w)
    x = rng.uniform(0, 1, 3)
    theta = float(x @ w) + 0.25
    br = best_response_linear(x, w, theta, budget=1.0)
    u = np.cross(w, [1.0, 0.0, 0.0])
    u /= np.linalg.norm(u)
    v = np.cross(w, u)
    ts = np.linspace(-3, 3, 1500)
    uu, vv = np.meshgrid(ts, ts)
    points = theta * w[None, :] + uu.reshape(-1, 1) * u + vv.reshape(-1, 1) * v
    oracle = float(np.min(np.linalg.norm(points - x, axis=1)))
    assert abs(br.cost_paid - oracle) <= 1e-2


def _dataset_1d(xs, groups=None, labels=None):
    n = len(xs)
    return Dataset(groups or [0] * n, labels or [1] * n, [[v] for v in xs])


def test_induce_zero_budget_identity():
    ds = _dataset_1d([0.1, 0.4, 0.9])
    out = induce_dataset(ds, ThresholdClassifier(0.5), AbsPowerCost(1), 0.0)
    assert np.array_equal(out.features, ds.features)


def test_induce_infinite_budget_all_positive():
    ds = _dataset_1d([0.1, 0.4, 0.9])
    f = ThresholdClassifier(0.5)
    out = induce_dataset(ds, f, AbsPowerCost(1), math.inf)
    assert np.all(f.predict(out.features) == 1)


def test_induce_hand_case():
    # theta=0.5, |.| cost, B=0.2: exactly x in [0.3, 0.5) moves to 0.5
    ds = _dataset_1d([0.1, 0.3, 0.45, 0.5, 0.9])
    out = induce_dataset(ds, ThresholdClassifier(0.5), AbsPowerCost(1), 0.2)
    assert list(out.features[:, 0]) == [0.1, 0.5, 0.5, 0.5, 0.9]
    assert np.array_equal(out.groups, ds.groups)
    assert np.array_equal(out.labels, ds.labels)


def test_induce_preserves_order_and_count():
    rng = np.random.default_rng(3)
    ds = Dataset(rng.integers(0, 2, 50), rng.integers(0, 2, 50), rng.uniform(0, 1, (50, 1)))
    out = induce_dataset(ds, ThresholdClassifier(0.6), AbsPowerCost(2), 0.05)
    assert len(out) == 50
    untouched = out.features[:, 0] == ds.features[:, 0]
    moved = ~untouched
    assert np.all(out.features[moved, 0] == 0.6)


def test_induce_dimension_mismatch():
    ds = _dataset_1d([0.1, 0.9])
    f = LinearClassifier((1.0, 0.0), 0.5)
    with pytest.raises(DimensionMismatch):
        induce_dataset(ds, f, L2Cost(), 0.5)


def test_agent_utility_formula():
    f = ThresholdClassifier(0.5)
    assert agent_utility(f, 0.4, 0.4, AbsPowerCost(1)) == 0.0
    assert agent_utility(f, 0.2, 0.5, AbsPowerCost(1)) == pytest.approx(0.7)
    assert agent_utility(f, 0.1, 0.4, AbsPowerCost(1)) == pytest.approx(-0.3)


def test_manipulable_set_cases():
    ds = _dataset_1d([0.1, 0.35, 0.45, 0.9])
    f = ThresholdClassifier(0.5)
    assert manipulable_set(ds, f, AbsPowerCost(1), 0.0).indices == ()
    ms = manipulable_set(ds, f, AbsPowerCost(1), 0.2)
    assert ms.indices == (1, 2) and ms.gamma == 0.5
    full = manipulable_set(ds, f, AbsPowerCost(1), math.inf)
    assert full.indices == (0, 1, 2)


def test_rationality_against_random_alternatives():
    # budgets <= 1 keep the budget-model response optimal for the raw
    # utility f(x') - f(x) - c as well
    rng = np.random.default_rng(5)
    f = ThresholdClassifier(0.55)
    cost = AbsPowerCost(2)
    for _ in range(25):
        x = float(rng.uniform(0, 1))
        budget = float(rng.uniform(0, 1))
        br = best_response_threshold(x, f.theta, cost, budget)
        u_best = agent_utility(f, x, br.reported[0], cost)
        assert u_best >= agent_utility(f, x, x, cost) - 1e-12
        reach = cost.reach(budget)
        alternatives = x + rng.uniform(-reach, reach, 1000)
        for alt in np.clip(alternatives, 0.0, 1.0):
            assert u_best >= agent_utility(f, x, float(alt), cost) - 1e-12


def test_rationality_linear():
    rng = np.random.default_rng(6)
    w = rng.normal(size=3)
    w /= np.linalg.norm(w)
    f = LinearClassifier(tuple(w), 0.4)
    for _ in range(10):
        x = rng.uniform(0, 1, 3)
        budget = float(rng.uniform(0, 1))
        br = best_response_linear(x, w, f.theta, budget)
        u_best = agent_utility(f, x, np.asarray(br.reported), L2Cost())
        directions = rng.normal(size=(1000, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = rng.uniform(0, budget, 1000)
        for alt in x + radii[:, None] * directions:
            assert u_best >= agent_utility(f, x, alt, L2Cost()) - 1e-9


def test_manipulable_set_monotone_in_budget():
    rng = np.random.default_rng(8)
    ds = Dataset(rng.integers(0, 2, 80), rng.integers(0, 2, 80), rng.uniform(0, 1, (80, 1)))
    f = ThresholdClassifier(0.7)
    cost = AbsPowerCost(2)
    previous = set()
    for b in np.linspace(0, 0.6, 12):
        current = set(manipulable_set(ds, f, cost, b).indices)
        assert previous <= current
        previous = current


def test_manipulable_set_monotone_in_budget_linear():
    rng = np.random.default_rng(12)
    ds = Dataset(rng.integers(0, 2, 80), rng.integers(0, 2, 80), rng.uniform(0, 1, (80, 3)))
    w = rng.normal(size=3)
    f = LinearClassifier(tuple(w / np.linalg.norm(w)), 0.6)
    previous = set()
    for b in np.linspace(0, 1.5, 12):
        current = set(manipulable_set(ds, f, L2Cost(), b).indices)
        assert previous <= current
        previous = current


def test_one_directional_and_idempotent():
    rng = np.random.default_rng(9)
    X = rng.uniform(0, 1, (100, 2))
    ds = Dataset(rng.integers(0, 2, 100), rng.integers(0, 2, 100), X)
    w = np.array([0.8, 0.6])
    f = LinearClassifier(tuple(w / np.linalg.norm(w)), 0.7)
    before = f.predict(ds.features)
    induced = induce_dataset(ds, f, L2Cost(), 0.3)
    after = f.predict(induced.features)
    assert np.all(after >= before)  # no 1 -> 0 flips
    again = induce_dataset(induced, f, L2Cost(), 0.3)
    assert np.array_equal(again.features, induced.features)


def test_fairness_decomposition_zero_budget():
    ds = Dataset([0, 1, 0, 1], [1, 1, 0, 0], [[0.1], [0.2], [0.8], [0.9]])
    f = ThresholdClassifier(0.5)
    dec = fairness_decomposition(ds, f, AbsPowerCost(1), 0.0, Metric.PR)
    assert dec.gamma == 0.0
    assert dec.u_restricted is None
    assert dec.u_full == pytest.approx(0.0)


def test_fairness_decomposition_hand_case():
    # 8 records; theta=0.5, B=0.2 moves x in [0.3, 0.5)
    groups = [0, 1, 0, 1, 0, 1, 0, 1]
    labels = [1, 1, 0, 0, 1, 1, 0, 0]
    xs = [0.35, 0.4, 0.45, 0.48, 0.1, 0.2, 0.7, 0.9]
    ds = Dataset(groups, labels, [[v] for v in xs])
    f = ThresholdClassifier(0.5)
    dec = fairness_decomposition(ds, f, AbsPowerCost(1), 0.2, Metric.PR)
    assert dec.gamma == 0.5  # indices 0..3
    # restricted to S = {0,1,2,3}: every member is negatively classified,
    # both groups present, so the restricted gap is exactly 0
    assert dec.u_restricted == 0.0
    # full-sample PR gap: group 1 rate 1/4 vs group 0 rate 1/4
    assert dec.u_full == pytest.approx(0.0)


def test_fairness_decomposition_single_group_restriction():
    groups = [1, 1, 0, 0]
    xs = [0.4, 0.45, 0.1, 0.9]
    ds = Dataset(groups, [1, 1, 1, 1], [[v] for v in xs])
    dec = fairness_decomposition(ds, ThresholdClassifier(0.5), AbsPowerCost(1), 0.2, Metric.PR)
    assert dec.gamma == 0.5
    assert dec.u_restricted is None  # S holds only group-1 records


def test_best_responses_tabular_requires_predicates():
    from fairshift.linear_lab import construct_adversarial_cost

    ds = _dataset_1d([0.2, 0.4, 0.6, 0.8])
    f_c = ThresholdClassifier(0.3)
    f_f = ThresholdClassifier(0.7)
    cost = construct_adversarial_cost(f_c, f_f)
    _, moved, costs = best_responses(ds, f_f, cost, 1.0)
    # movers are exactly the records with f_C=1, f_F=0
    assert list(moved) == [False, True, True, False]
    assert all(c == 1.0 for c in costs[moved])
