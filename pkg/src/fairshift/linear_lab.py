"""Multivariate suite: linear learners with a fairness penalty, selectivity
diagnostics, budget sweeps via offset shifts, region measures, the
adversarial cost construction, and the monotone-index synthetic family.

For a unit normal w and L2 cost, best responding with budget B is decision
equivalent to lowering the offset by B. Every sweep here runs on that shift
path; the per-record simulation path exists as an oracle for tests.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import (
    ContractError,
    DegenerateLabels,
    DimensionMismatch,
    EmptyConditioningCell,
    InvalidSpec,
    NonUnitNormal,
)
from .metrics import Metric, error_rate, unfairness
from .rng import generator
from .strategic import L2Cost, TabularCost, as_budget, induce_dataset
from .threshold_lab import (
    BudgetSweepResult,
    ThresholdClassifier,
    _ThresholdEvaluator,
)

UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class LinearClassifier:
    """Predicts 1[w.x >= theta] for a unit-norm weight vector."""

    w: tuple[float, ...]
    theta: float

    def __post_init__(self):
        norm = float(np.linalg.norm(self.w))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise NonUnitNormal(f"||w|| = {norm}, expected 1")

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.w, dtype=np.float64)

    def scores(self, features) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != len(self.w):
            raise DimensionMismatch(
                f"features have dim {features.shape[1]}, classifier has {len(self.w)}"
            )
        return features @ self.weights

    def predict(self, features) -> np.ndarray:
        return (self.scores(features) >= self.theta).astype(np.int8)

    def to_dict(self) -> dict:
        return {"w": [float(v) for v in self.w], "theta": float(self.theta)}

    @classmethod
    def from_direction(cls, direction, theta: float) -> "LinearClassifier":
        direction = np.asarray(direction, dtype=np.float64)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            raise ContractError("direction must be nonzero")
        unit = direction / norm
        return cls(tuple(float(v) for v in unit), float(theta))


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _penalty_masks(ds: Dataset, metric: Metric) -> tuple[np.ndarray, np.ndarray]:
    masks = []
    for g in (1, 0):
        mask = ds.groups == g
        if metric == Metric.TPR:
            mask &= ds.labels == 1
        elif metric == Metric.FPR:
            mask &= ds.labels == 0
        if not mask.any():
            raise EmptyConditioningCell(metric.value, g)
        masks.append(mask)
    return masks[0], masks[1]


def fit_linear_scores(
    ds: Dataset,
    penalty_weight: float = 0.0,
    metric: Metric = Metric.PR,
    epochs: int = 200,
    step: float = 0.5,
    seed: int = 0,
) -> tuple[np.ndarray, float, list[float]]:
    """Gradient descent on logistic loss plus a smoothed unfairness penalty
    (gap of group-mean sigmoid scores).

    The step is backtracked whenever a move would raise the objective, so
    the returned loss history is nonincreasing. Deterministic per seed.
    """
    X = ds.features
    n, d = X.shape
    z = 2.0 * ds.labels.astype(np.float64) - 1.0
    mask1 = mask0 = None
    if penalty_weight > 0.0:
        mask1, mask0 = _penalty_masks(ds, metric)

    rng = generator(seed)
    w = 0.01 * rng.standard_normal(d)
    b = 0.0

    def objective(wv, bv):
        s = X @ wv + bv
        loss = float(np.mean(np.logaddexp(0.0, -z * s)))
        if penalty_weight > 0.0:
            gap = float(np.mean(_sigmoid(s[mask1])) - np.mean(_sigmoid(s[mask0])))
            loss += penalty_weight * abs(gap)
        return loss

    def gradients(wv, bv):
        s = X @ wv + bv
        resid = -z * _sigmoid(-z * s)
        gw = X.T @ resid / n
        gb = float(np.mean(resid))
        if penalty_weight > 0.0:
            sig = _sigmoid(s)
            dsig = sig * (1.0 - sig)
            gap = float(np.mean(sig[mask1]) - np.mean(sig[mask0]))
            sign = 1.0 if gap >= 0.0 else -1.0
            pen = np.zeros(n)
            pen[mask1] = dsig[mask1] / mask1.sum()
            pen[mask0] = -dsig[mask0] / mask0.sum()
            gw = gw + penalty_weight * sign * (X.T @ pen)
            gb = gb + penalty_weight * sign * float(pen.sum())
        return gw, gb

    loss = objective(w, b)
    history = [loss]
    for _ in range(epochs):
        gw, gb = gradients(w, b)
        trial = step
        accepted = False
        for _ in range(40):
            w2 = w - trial * gw
            b2 = b - trial * gb
            l2 = objective(w2, b2)
            if l2 <= loss:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            break
        w, b, loss = w2, b2, l2
        history.append(loss)
    return w, b, history


def _direction(w: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(w))
    if norm < 1e-12:
        unit = np.zeros(len(w))
        unit[0] = 1.0
        return unit
    return w / norm


def _score_grid(scores: np.ndarray) -> np.ndarray:
    # distinct score values plus one all-negative threshold
    return np.unique(np.concatenate([scores, [scores.max() + 1.0]]))


def _score_dataset(ds: Dataset, scores: np.ndarray) -> Dataset:
    return Dataset(ds.groups.copy(), ds.labels.copy(), scores[:, None], ["score"])


def train_base_linear(
    ds: Dataset, epochs: int = 200, step: float = 0.5, seed: int = 0
) -> LinearClassifier:
    """Accuracy-oriented linear classifier: logistic fit for the direction,
    then an exact error-minimizing sweep over the scores for the offset."""
    if not ds.has_both_labels:
        raise DegenerateLabels("both labels are required to train")
    w, _, _ = fit_linear_scores(ds, 0.0, Metric.PR, epochs, step, seed)
    unit = _direction(w)
    scores = ds.features @ unit
    ev = _ThresholdEvaluator(_score_dataset(ds, scores), 0, Metric.PR)
    grid = _score_grid(scores)
    theta = float(grid[int(np.argmin(ev.error(grid)))])
    return LinearClassifier(tuple(float(v) for v in unit), theta)


def train_fair_linear(
    ds: Dataset,
    alpha: float,
    metric: Metric,
    epochs: int = 200,
    step: float = 0.5,
    seed: int = 0,
) -> LinearClassifier:
    """Penalized linear classifier; never worse than the base solution on
    its own weighted objective (falls back to the base otherwise)."""
    if not 0.0 <= alpha < 1.0:
        raise ContractError(f"alpha must be in [0, 1), got {alpha}")
    if not ds.has_both_labels:
        raise DegenerateLabels("both labels are required to train")
    base = train_base_linear(ds, epochs, step, seed)
    if alpha == 0.0:
        return base
    w, _, _ = fit_linear_scores(ds, alpha / (1.0 - alpha), metric, epochs, step, seed)
    unit = _direction(w)
    scores = ds.features @ unit
    ev = _ThresholdEvaluator(_score_dataset(ds, scores), 0, metric)
    grid = _score_grid(scores)
    objective = (1.0 - alpha) * ev.error(grid) + alpha * ev.unfairness(grid)
    fair = LinearClassifier(tuple(float(v) for v in unit), float(grid[int(np.argmin(objective))]))

    def weighted(f: LinearClassifier) -> float:
        return (1.0 - alpha) * error_rate(ds, f) + alpha * unfairness(ds, f, metric)

    return fair if weighted(fair) <= weighted(base) else base


@dataclass(frozen=True)
class SelectivityReport:
    """Weight alignment and offset gap between a base/fair pair.

    hadamard_positive asks for no strictly negative coordinate product;
    approx tolerates negative products carrying less than magnitude_tol of
    the total |w_C| . |w_F| mass.
    """

    hadamard_positive: bool
    approx: bool
    theta_gap: float
    negative_mass_ratio: float
    zero_coordinates: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "hadamard_positive": self.hadamard_positive,
            "approx": self.approx,
            "theta_gap": self.theta_gap,
            "negative_mass_ratio": self.negative_mass_ratio,
            "zero_coordinates": list(self.zero_coordinates),
        }


def selectivity_check(
    f_c: LinearClassifier, f_f: LinearClassifier, magnitude_tol: float = 0.10
) -> SelectivityReport:
    wc, wf = f_c.weights, f_f.weights
    if wc.shape != wf.shape:
        raise DimensionMismatch("classifiers live in different dimensions")
    products = wc * wf
    mass = np.abs(products)
    total = float(mass.sum())
    negative = float(mass[products < 0].sum())
    ratio = 0.0 if total == 0.0 else negative / total
    return SelectivityReport(
        hadamard_positive=bool(not (products < 0).any()),
        approx=bool(ratio < magnitude_tol),
        theta_gap=float(f_f.theta - f_c.theta),
        negative_mass_ratio=ratio,
        zero_coordinates=tuple(int(i) for i in np.where(products == 0)[0]),
    )


def linear_budget_sweep(
    ds: Dataset,
    f_c: LinearClassifier,
    f_f: LinearClassifier,
    budgets,
    metric: Metric,
) -> BudgetSweepResult:
    """Sweep both classifiers over budgets on the shift path
    (offset theta - B, original features)."""
    budgets = np.asarray(budgets, dtype=np.float64)
    if len(budgets) < 1 or np.any(np.diff(budgets) < 0):
        raise ContractError("budgets must be sorted ascending")
    evs = {}
    for name, f in (("c", f_c), ("f", f_f)):
        scores = f.scores(ds.features)
        evs[name] = (_ThresholdEvaluator(_score_dataset(ds, scores), 0, metric), f.theta)
    ev_c, theta_c = evs["c"]
    ev_f, theta_f = evs["f"]
    return BudgetSweepResult(
        budgets=budgets,
        error_c=ev_c.error(theta_c - budgets),
        error_f=ev_f.error(theta_f - budgets),
        unfair_c=ev_c.unfairness(theta_c - budgets),
        unfair_f=ev_f.unfairness(theta_f - budgets),
        metric=metric,
        cost_kind="l2",
    )


@dataclass(frozen=True)
class RegionMeasures:
    """Fractions of the sample in the disagreement regions of the two
    shifted classifiers, plus the fair-only positive mass at budget 0."""

    mass_s0: float
    mass_s1: float
    mass_f_only: float

    def to_dict(self) -> dict:
        return {
            "mass_S0": self.mass_s0,
            "mass_S1": self.mass_s1,
            "mass_F_only": self.mass_f_only,
        }


def region_measures(
    ds: Dataset, f_c: LinearClassifier, f_f: LinearClassifier, budget
) -> RegionMeasures:
    b = as_budget(budget).value
    pos_c = f_c.scores(ds.features) >= f_c.theta - b
    pos_f = f_f.scores(ds.features) >= f_f.theta - b
    pos_c0 = f_c.predict(ds.features) == 1
    pos_f0 = f_f.predict(ds.features) == 1
    return RegionMeasures(
        mass_s0=float(np.mean(pos_c & ~pos_f)),
        mass_s1=float(np.mean(pos_f & ~pos_c)),
        mass_f_only=float(np.mean(pos_f0 & ~pos_c0)),
    )


def _boundary_mover(f):
    """Vectorized map sending points to the positive side of f's boundary."""
    if isinstance(f, ThresholdClassifier):
        def move(X):
            X = np.atleast_2d(np.asarray(X, dtype=np.float64)).copy()
            X[:, f.j] = f.theta
            return X

        return move
    if isinstance(f, LinearClassifier):
        w = f.weights

        def move(X):
            X = np.atleast_2d(np.asarray(X, dtype=np.float64)).copy()
            gap = f.theta - X @ w
            X += np.maximum(gap, 0.0)[:, None] * w
            short = f.theta - X @ w
            fix = short > 0.0
            if fix.any():
                X[fix] += (short[fix] + 1e-12 * max(1.0, abs(f.theta)))[:, None] * w
            return X

        return move
    raise ContractError(f"no boundary mover for {type(f).__name__}")


def construct_adversarial_cost(f_c, f_f) -> TabularCost:
    """Unit-cost moves exactly from the base-only positive region into the
    fair classifier's positive region; everything else is unaffordable."""

    def source_allowed(X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return (f_c.predict(X) == 1) & (f_f.predict(X) == 0)

    def target_allowed(X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return f_f.predict(X) == 1

    return TabularCost(source_allowed, target_allowed, _boundary_mover(f_f))


@dataclass(frozen=True)
class SubsetBoundReport:
    """Unfairness comparison under the constructed adversarial cost.

    lhs = u_F_strategic - u_C_strategic (both best responding to their own
    classifier under the constructed cost, budget 1); rhs = u_C_truthful -
    mass_F_only. u_C_unbounded (L2 cost, infinite budget: the all-positive
    regime) is reported alongside as the degenerate reference point.
    """

    u_f_strategic: float | None
    u_c_strategic: float | None
    u_c_truthful: float | None
    u_c_unbounded: float | None
    mass_f_only: float
    lhs: float | None
    rhs: float | None
    bound_satisfied: bool | None
    equal_within_tol: bool | None

    def to_dict(self) -> dict:
        return {
            "u_F_strategic": self.u_f_strategic,
            "u_C_strategic": self.u_c_strategic,
            "u_C_truthful": self.u_c_truthful,
            "u_C_unbounded": self.u_c_unbounded,
            "mass_F_only": self.mass_f_only,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "bound_satisfied": self.bound_satisfied,
            "equal_within_tol": self.equal_within_tol,
        }


def _safe_unfairness(ds: Dataset, f, metric: Metric) -> float | None:
    try:
        return unfairness(ds, f, metric)
    except EmptyConditioningCell:
        return None


def subset_bound_report(ds: Dataset, f_c, f_f, metric: Metric) -> SubsetBoundReport:
    cost = construct_adversarial_cost(f_c, f_f)
    u_f_strat = _safe_unfairness(induce_dataset(ds, f_f, cost, 1.0), f_f, metric)
    u_c_strat = _safe_unfairness(induce_dataset(ds, f_c, cost, 1.0), f_c, metric)
    u_c_truth = _safe_unfairness(ds, f_c, metric)
    u_c_unbounded = _safe_unfairness(
        induce_dataset(ds, f_c, L2Cost(), math.inf), f_c, metric
    )
    pos_c = f_c.predict(ds.features) == 1
    pos_f = f_f.predict(ds.features) == 1
    mass_f_only = float(np.mean(pos_f & ~pos_c))

    lhs = rhs = bound = equal = None
    if u_f_strat is not None and u_c_strat is not None:
        lhs = u_f_strat - u_c_strat
    if u_c_truth is not None:
        rhs = u_c_truth - mass_f_only
    if lhs is not None and rhs is not None:
        bound = bool(lhs > rhs)
        equal = bool(abs(lhs - rhs) <= 1e-12)
    return SubsetBoundReport(
        u_f_strategic=u_f_strat,
        u_c_strategic=u_c_strat,
        u_c_truthful=u_c_truth,
        u_c_unbounded=u_c_unbounded,
        mass_f_only=mass_f_only,
        lhs=lhs,
        rhs=rhs,
        bound_satisfied=bound,
        equal_within_tol=equal,
    )


def fairness_recovery_shift(f: LinearClassifier, budget) -> LinearClassifier:
    """Raise the offset by the full budget so strategic decisions against
    the shifted classifier coincide with truthful decisions against f."""
    b = as_budget(budget)
    if b.is_infinite:
        raise ContractError("recovery shift needs a finite budget")
    return LinearClassifier(f.w, f.theta + b.value)


@dataclass(frozen=True)
class LogisticLink:
    """Monotone link t -> sigmoid(slope * (t - intercept))."""

    slope: float
    intercept: float

    def __call__(self, t):
        return _sigmoid(self.slope * (np.asarray(t, dtype=np.float64) - self.intercept))


@dataclass(frozen=True)
class MonotoneIndexSpec:
    """Synthetic family where both the label and the group are Bernoulli in
    monotone transforms of linear indices of a uniform-cube feature vector,
    independently given x."""

    v_y: tuple[float, ...]
    v_g: tuple[float, ...]
    link_y: LogisticLink
    link_g: LogisticLink
    sample_size: int
    seed: int
    advantaged_aligned: bool = False

    def validate(self) -> None:
        if len(self.v_y) != len(self.v_g) or len(self.v_y) < 1:
            raise InvalidSpec("v_y and v_g must share a positive dimension")
        if self.sample_size <= 0:
            raise InvalidSpec("sample_size must be positive")
        if self.advantaged_aligned:
            prod = np.asarray(self.v_y) * np.asarray(self.v_g)
            if not (prod > 0).all():
                raise InvalidSpec("advantaged-aligned spec requires v_g * v_y > 0 elementwise")


def generate_monotone_index(spec: MonotoneIndexSpec) -> Dataset:
    """x ~ U[0,1]^d, then y ~ Bern(link_y(v_y.x)) and g ~ Bern(link_g(v_g.x))
    drawn independently given x. Deterministic per seed (x, then y, then g)."""
    spec.validate()
    rng = generator(spec.seed)
    d = len(spec.v_y)
    X = rng.uniform(0.0, 1.0, size=(spec.sample_size, d))
    p_y = spec.link_y(X @ np.asarray(spec.v_y))
    p_g = spec.link_g(X @ np.asarray(spec.v_g))
    y = (rng.uniform(size=spec.sample_size) < p_y).astype(np.int8)
    g = (rng.uniform(size=spec.sample_size) < p_g).astype(np.int8)
    names = [f"x{j}" for j in range(d)]
    return Dataset(g, y, X, names)
