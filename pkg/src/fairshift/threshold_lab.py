"""Single-feature threshold classifiers: sweeps, optimal thresholds,
shift equivalence, reversal detection, and the distributional conditions
that make a fair threshold land above the base one.

The central identity: best responding to 1[x >= theta] under a monotone
1-D cost with budget B classifies exactly the records that a *shifted*
threshold theta' = min{x : c(x, theta) <= B} classifies truthfully. Budget
sweeps therefore evaluate shifted thresholds on the original sample, and
the simulation path is kept only as a cross-check oracle.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset
from .errors import (
    ContractError,
    DimensionMismatch,
    EmptyConditioningCell,
    NoCrossingFound,
    NotSeparable,
    NotSelective,
)
from .metrics import (
    CrossingReport,
    CurveEstimate,
    Metric,
    _cell_mask,
    error_rate,
    estimate_conditional,
    single_crossing_check,
    statistical_tol,
)
from .strategic import AbsPowerCost, as_budget, induce_dataset


@dataclass(frozen=True)
class ThresholdClassifier:
    """Predicts 1[x_j >= theta]."""

    theta: float
    j: int = 0

    def predict(self, features) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        return (features[:, self.j] >= self.theta).astype(np.int8)

    def to_dict(self) -> dict:
        return {"theta": float(self.theta), "j": int(self.j)}


class _ThresholdEvaluator:
    """Shared sorted-prefix machinery: error and unfairness of 1[x >= t]
    for arbitrary t in O(log n) after O(n log n) setup."""

    def __init__(self, ds: Dataset, j: int, metric: Metric):
        x = ds.features[:, j]
        order = np.argsort(x, kind="stable")
        self.xs = x[order]
        ys = np.asarray(ds.labels[order], dtype=np.int64)
        self.prefix_pos = np.concatenate([[0], np.cumsum(ys)])
        self.n = len(x)
        self.n_neg = int(self.n - ys.sum())
        self.cells = {}
        self.cells_defined = True
        for g in (0, 1):
            mask = _cell_mask(ds, metric, g)
            if not mask.any():
                self.cells_defined = False
                continue
            self.cells[g] = np.sort(x[mask])

    def error(self, thetas) -> np.ndarray:
        thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
        k = np.searchsorted(self.xs, thetas, side="left")
        pos_below = self.prefix_pos[k]
        neg_at_or_above = self.n_neg - (k - pos_below)
        return (pos_below + neg_at_or_above) / self.n

    def unfairness(self, thetas) -> np.ndarray:
        thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
        if not self.cells_defined:
            return np.full(len(thetas), np.nan)
        rates = {}
        for g, cell in self.cells.items():
            below = np.searchsorted(cell, thetas, side="left")
            rates[g] = (len(cell) - below) / len(cell)
        return np.abs(rates[1] - rates[0])


@dataclass
class ThresholdSweep:
    """Error and unfairness of 1[x_j >= theta] over a threshold grid."""

    grid: np.ndarray
    error: np.ndarray
    unfairness: np.ndarray
    metric: Metric
    j: int
    _objective_cache: dict = field(default_factory=dict, repr=False)

    @property
    def unfairness_defined(self) -> bool:
        return not np.isnan(self.unfairness).any()

    def alpha_objective(self, alpha: float) -> np.ndarray:
        key = float(alpha)
        if key not in self._objective_cache:
            self._objective_cache[key] = (1.0 - key) * self.error + key * self.unfairness
        return self._objective_cache[key]

    def to_rows(self) -> list[dict]:
        return [
            {
                "theta": float(t),
                "error": float(e),
                "unfairness": None if math.isnan(u) else float(u),
            }
            for t, e, u in zip(self.grid, self.error, self.unfairness)
        ]


def sweep_thresholds(ds: Dataset, j: int, grid_size: int, metric: Metric) -> ThresholdSweep:
    """Evaluate thresholds over a grid.

    grid_size == 0 is exact mode: the grid is the sorted distinct feature
    values plus {0, 1}, which covers every achievable classification of the
    sample. Otherwise the grid is grid_size uniform points on [0, 1].
    """
    if not 0 <= j < ds.dim:
        raise DimensionMismatch(f"feature index {j} out of range for d={ds.dim}")
    x = ds.features[:, j]
    if grid_size == 0:
        grid = np.unique(np.concatenate([x, [0.0, 1.0]]))
    elif grid_size >= 3:
        grid = np.linspace(0.0, 1.0, grid_size)
    else:
        raise ContractError("grid_size must be 0 (exact) or >= 3")
    ev = _ThresholdEvaluator(ds, j, metric)
    return ThresholdSweep(grid, ev.error(grid), ev.unfairness(grid), metric, j)


def optimal_base_threshold(sweep: ThresholdSweep) -> float:
    """Error-minimizing threshold; ties break to the smallest."""
    return float(sweep.grid[int(np.argmin(sweep.error))])


def optimal_alpha_fair_threshold(sweep: ThresholdSweep, alpha: float) -> float:
    """Minimizer of (1 - alpha) * error + alpha * unfairness; ties break to
    the smallest threshold, so alpha = 0 reproduces the base threshold."""
    if not 0.0 <= alpha <= 1.0:
        raise ContractError(f"alpha must be in [0, 1], got {alpha}")
    if alpha > 0.0 and not sweep.unfairness_defined:
        raise EmptyConditioningCell(sweep.metric.value, -1)
    if alpha == 0.0:
        return optimal_base_threshold(sweep)
    return float(sweep.grid[int(np.argmin(sweep.alpha_objective(alpha)))])


def max_unfair_threshold(sweep: ThresholdSweep) -> float:
    """Unfairness-maximizing threshold; ties break to the smallest, so a
    flat zero curve degenerates to the smallest grid value."""
    if not sweep.unfairness_defined:
        raise EmptyConditioningCell(sweep.metric.value, -1)
    return float(sweep.grid[int(np.argmax(sweep.unfairness))])


def shifted_threshold(theta: float, cost, budget) -> float:
    """Smallest feature value that can afford to reach theta.

    Closed form for power costs; bisection to 1e-10 for any other monotone
    1-D cost exposing cost(x, x').
    """
    b = as_budget(budget)
    if b.is_infinite:
        return 0.0
    reach = getattr(cost, "reach", None)
    if reach is not None:
        return max(0.0, theta - float(reach(b.value)))
    if float(np.asarray(cost.cost(0.0, theta))) <= b.value:
        return 0.0
    lo, hi = 0.0, float(theta)
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if float(np.asarray(cost.cost(mid, theta))) <= b.value:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class BudgetSweepResult:
    """Error/unfairness of a base and a fair classifier across budgets."""

    budgets: np.ndarray
    error_c: np.ndarray
    error_f: np.ndarray
    unfair_c: np.ndarray
    unfair_f: np.ndarray
    metric: Metric
    cost_kind: str

    def to_rows(self) -> list[dict]:
        def opt(v: float):
            return None if math.isnan(v) else float(v)

        return [
            {
                "budget": float(b),
                "error_C": float(ec),
                "error_F": float(ef),
                "unfair_C": opt(uc),
                "unfair_F": opt(uf),
            }
            for b, ec, ef, uc, uf in zip(
                self.budgets, self.error_c, self.error_f, self.unfair_c, self.unfair_f
            )
        ]


def budget_sweep(
    ds: Dataset,
    theta_c: float,
    theta_f: float,
    cost,
    budgets,
    metric: Metric,
    j: int = 0,
) -> BudgetSweepResult:
    """Evaluate both thresholds across budgets via the shift equivalence."""
    budgets = np.asarray(budgets, dtype=np.float64)
    if len(budgets) < 1 or np.any(np.diff(budgets) < 0):
        raise ContractError("budgets must be sorted ascending")
    ev = _ThresholdEvaluator(ds, j, metric)
    shifted_c = np.array([shifted_threshold(theta_c, cost, b) for b in budgets])
    shifted_f = np.array([shifted_threshold(theta_f, cost, b) for b in budgets])
    return BudgetSweepResult(
        budgets=budgets,
        error_c=ev.error(shifted_c),
        error_f=ev.error(shifted_f),
        unfair_c=ev.unfairness(shifted_c),
        unfair_f=ev.unfairness(shifted_f),
        metric=metric,
        cost_kind=getattr(cost, "kind", "custom"),
    )


@dataclass(frozen=True)
class BudgetInterval:
    lo: float
    hi: float
    magnitude: float
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "magnitude": self.magnitude,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class ReversalReport:
    """Budget intervals where the fair classifier is at least as unfair as
    the base one (and where it is strictly more accurate)."""

    reversal_intervals: tuple[BudgetInterval, ...]
    magnitude: float
    accuracy_reversal_intervals: tuple[BudgetInterval, ...]

    @property
    def nondegenerate(self) -> bool:
        return any(not iv.degenerate for iv in self.reversal_intervals)

    def to_dict(self) -> dict:
        return {
            "reversal_intervals": [iv.to_dict() for iv in self.reversal_intervals],
            "magnitude": self.magnitude,
            "accuracy_reversal_intervals": [
                iv.to_dict() for iv in self.accuracy_reversal_intervals
            ],
        }


def _mask_intervals(budgets, mask, gaps) -> list[BudgetInterval]:
    intervals = []
    i = 0
    n = len(mask)
    while i < n:
        if not mask[i]:
            i += 1
            continue
        start = i
        while i < n and mask[i]:
            i += 1
        run_gaps = gaps[start:i]
        magnitude = float(np.max(run_gaps))
        intervals.append(
            BudgetInterval(
                lo=float(budgets[start]),
                hi=float(budgets[i - 1]),
                magnitude=magnitude,
                degenerate=bool(magnitude <= 0.0),
            )
        )
    return intervals


def detect_fairness_reversal(res: BudgetSweepResult) -> ReversalReport:
    """Maximal budget runs with unfair_F >= unfair_C; runs where the curves
    merely coincide are flagged degenerate (the all-positive regime)."""
    with np.errstate(invalid="ignore"):
        fair_gap = res.unfair_f - res.unfair_c
        fair_mask = fair_gap >= 0.0
        acc_gap = res.error_c - res.error_f
        acc_mask = acc_gap > 0.0
    fair_mask &= ~np.isnan(fair_gap)
    acc_mask &= ~np.isnan(acc_gap)
    reversal = _mask_intervals(res.budgets, fair_mask, fair_gap)
    accuracy = _mask_intervals(res.budgets, acc_mask, acc_gap)
    magnitude = max((iv.magnitude for iv in reversal), default=0.0)
    return ReversalReport(tuple(reversal), float(magnitude), tuple(accuracy))


GROUP_REFERENCE_CONDITION = {Metric.PR: None, Metric.TPR: 1, Metric.FPR: 0}


@dataclass(frozen=True)
class SufficientConditionReport:
    """Whether the group curve crosses its base rate to the left of where
    the label curve crosses its own (x_g < x_y), plus the alpha range whose
    fair threshold actually lands above the base threshold."""

    x_y: float
    x_g: float
    holds: bool
    label_crossing: CrossingReport
    group_crossing: CrossingReport
    alpha_interval: tuple[float, float] | None
    alphas_selective: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "x_y": self.x_y,
            "x_g": self.x_g,
            "holds": self.holds,
            "label_crossing": self.label_crossing.to_dict(),
            "group_crossing": self.group_crossing.to_dict(),
            "alpha_interval": list(self.alpha_interval) if self.alpha_interval else None,
            "alphas_selective": list(self.alphas_selective),
        }


def locate_crossing(curve: CurveEstimate, v: float, tol: float, name: str) -> tuple[CrossingReport, float]:
    report = single_crossing_check(curve, v, tol)
    if report.crossing_location is None:
        raise NoCrossingFound(name)
    return report, float(report.crossing_location)


def sufficient_condition_check(
    ds: Dataset,
    j: int,
    metric: Metric,
    bins: int = 20,
    alpha_step: float = 0.01,
    grid_size: int = 101,
) -> SufficientConditionReport:
    """Locate x_y and x_g empirically and scan alpha for selective fair
    thresholds (theta_F(alpha) > theta_C).

    The scan runs on a uniform grid by default: each grid step aggregates
    many records, so one record's noise cannot tip the argmin the way it
    can on the exact grid."""
    tol = statistical_tol(len(ds))
    label_curve = estimate_conditional(ds, "label", j, bins)
    p_y = float(np.mean(ds.labels))
    label_report, x_y = locate_crossing(label_curve, p_y, tol, "label")

    condition = GROUP_REFERENCE_CONDITION[metric]
    group_curve = estimate_conditional(ds, "group", j, bins, condition=condition)
    if condition is None:
        p_g = float(np.mean(ds.groups))
    else:
        cell = ds.labels == condition
        if not cell.any():
            raise EmptyConditioningCell(metric.value, -1)
        p_g = float(np.mean(ds.groups[cell]))
    group_report, x_g = locate_crossing(group_curve, p_g, tol, "group")

    sweep = sweep_thresholds(ds, j, grid_size, metric)
    theta_c = optimal_base_threshold(sweep)
    alphas = np.round(np.arange(alpha_step, 1.0, alpha_step), 10)
    selective = tuple(
        float(a) for a in alphas if optimal_alpha_fair_threshold(sweep, float(a)) > theta_c
    )
    interval = _longest_run(selective, alpha_step) if selective else None
    return SufficientConditionReport(
        x_y=x_y,
        x_g=x_g,
        holds=bool(x_g < x_y),
        label_crossing=label_report,
        group_crossing=group_report,
        alpha_interval=interval,
        alphas_selective=selective,
    )


def _longest_run(values: tuple[float, ...], step: float) -> tuple[float, float]:
    best = (values[0], values[0])
    start = values[0]
    prev = values[0]
    for v in values[1:]:
        if v - prev > 1.5 * step:
            if prev - start > best[1] - best[0]:
                best = (start, prev)
            start = v
        prev = v
    if prev - start > best[1] - best[0]:
        best = (start, prev)
    return best


@dataclass(frozen=True)
class AccuracyReversalReport:
    condition_holds: bool
    fair_more_accurate: bool
    error_c_strategic: float
    error_f_strategic: float
    mass_reachable_c: float
    mass_reachable_f: float
    mass_gap: float

    def to_dict(self) -> dict:
        return {
            "condition_holds": self.condition_holds,
            "fair_more_accurate": self.fair_more_accurate,
            "error_C_strategic": self.error_c_strategic,
            "error_F_strategic": self.error_f_strategic,
            "mass_reachable_C": self.mass_reachable_c,
            "mass_reachable_F": self.mass_reachable_f,
            "mass_gap": self.mass_gap,
        }


def separating_threshold(ds: Dataset, j: int = 0) -> float:
    """The threshold reproducing the labels exactly, or NotSeparable."""
    x = ds.features[:, j]
    pos = x[ds.labels == 1]
    neg = x[ds.labels == 0]
    lo = float(neg.max()) if len(neg) else -math.inf
    hi = float(pos.min()) if len(pos) else math.inf
    if lo >= hi:
        raise NotSeparable(f"labels are not a threshold of feature {j}")
    return hi if len(pos) else lo + 1.0


def accuracy_reversal_check(
    ds: Dataset,
    theta_c: float,
    theta_f: float,
    cost,
    budget,
    j: int = 0,
) -> AccuracyReversalReport:
    """On separable data with a more selective fair threshold, compare the
    reachable-mass condition against directly simulated strategic errors.

    The implication (condition holds => fair side more accurate) is a
    property of the inputs, checked by the test suite rather than enforced
    here.
    """
    separating_threshold(ds, j)  # raises NotSeparable when it does not exist
    if theta_f <= theta_c:
        raise NotSelective(f"theta_F={theta_f} must exceed theta_C={theta_c}")
    x = ds.features[:, j]
    shifted_c = shifted_threshold(theta_c, cost, budget)
    shifted_f = shifted_threshold(theta_f, cost, budget)
    mass_c = float(np.mean((x >= shifted_c) & (x < theta_c)))
    mass_f = float(np.mean((x >= shifted_f) & (x < theta_f)))
    mass_gap = float(np.mean((x >= theta_c) & (x <= theta_f)))
    condition = mass_c + mass_f >= mass_gap

    f_c = ThresholdClassifier(theta_c, j)
    f_f = ThresholdClassifier(theta_f, j)
    err_c = error_rate(induce_dataset(ds, f_c, cost, budget), f_c)
    err_f = error_rate(induce_dataset(ds, f_f, cost, budget), f_f)
    return AccuracyReversalReport(
        condition_holds=bool(condition),
        fair_more_accurate=bool(err_f < err_c),
        error_c_strategic=err_c,
        error_f_strategic=err_f,
        mass_reachable_c=mass_c,
        mass_reachable_f=mass_f,
        mass_gap=mass_gap,
    )


def verify_shift_equivalence(ds: Dataset, theta: float, cost, budget, j: int = 0) -> bool:
    """Oracle cross-check: simulate best responses and compare decisions
    against the shifted threshold on the untouched sample."""
    f = ThresholdClassifier(theta, j)
    induced = induce_dataset(ds, f, cost, budget)
    direct = f.predict(induced.features)
    shifted = ThresholdClassifier(shifted_threshold(theta, cost, budget), j)
    return bool(np.array_equal(direct, shifted.predict(ds.features)))
