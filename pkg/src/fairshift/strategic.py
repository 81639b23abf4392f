"""Cost models, budgets, best responses, and the induced dataset.

An agent reports features x' in place of x to flip a negative decision,
paying c(x, x'). Under a hard budget B the best response flips the decision
at minimum cost whenever any flip is feasible, and otherwise reports
truthfully; groups and true labels never change. The reported point lands
exactly on the decision boundary (ties classify positive).

With cost below 1 the budget-constrained response also maximizes the raw
utility f(x') - f(x) - c(x, x'); for costlier moves the budget model is the
one implemented, since it is the one the sweep machinery is built on.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import ContractError, DimensionMismatch, EmptyConditioningCell, NonUnitNormal
from .metrics import Metric, unfairness

UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class Budget:
    """Nonnegative manipulation budget; math.inf means unconstrained."""

    value: float

    def __post_init__(self):
        if math.isnan(self.value) or self.value < 0:
            raise ContractError(f"budget must be >= 0, got {self.value}")

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


def as_budget(b) -> Budget:
    return b if isinstance(b, Budget) else Budget(float(b))


class AbsPowerCost:
    """1-D cost |x - x'|**p with p >= 1; monotone in the move size."""

    kind = "abs_power"

    def __init__(self, p: float = 1.0):
        if p < 1.0:
            raise ContractError(f"exponent must be >= 1, got {p}")
        self.p = float(p)

    def cost(self, x, x_prime):
        return np.abs(np.asarray(x_prime) - np.asarray(x)) ** self.p

    def reach(self, budget: float) -> float:
        """Largest move size affordable at this budget."""
        if math.isinf(budget):
            return math.inf
        return float(budget) ** (1.0 / self.p)


class L2Cost:
    """Euclidean cost ||x - x'||_2 for feature vectors; on a single
    coordinate this is just the absolute move size."""

    kind = "l2"

    def cost(self, x, x_prime):
        x = np.asarray(x, dtype=np.float64)
        x_prime = np.asarray(x_prime, dtype=np.float64)
        if x.ndim == 0 or x_prime.ndim == 0:
            return np.abs(x_prime - x)
        return np.linalg.norm(np.atleast_2d(x_prime) - np.atleast_2d(x), axis=-1)

    def reach(self, budget: float) -> float:
        return float(budget)


class TabularCost:
    """Adversarial cost: unit price for moves from an allowed source region
    into an allowed target region, infinite otherwise.

    The predicates operate on (n, d) feature matrices; pick_target maps
    allowed sources to a concrete reported point inside the target region.
    """

    kind = "tabular"
    unit_cost = 1.0

    def __init__(self, source_allowed, target_allowed, pick_target):
        self.source_allowed = source_allowed
        self.target_allowed = target_allowed
        self.pick_target = pick_target

    def cost(self, x, x_prime):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        x_prime = np.atleast_2d(np.asarray(x_prime, dtype=np.float64))
        same = np.all(x == x_prime, axis=-1)
        allowed = self.source_allowed(x) & self.target_allowed(x_prime)
        return np.where(same, 0.0, np.where(allowed, self.unit_cost, math.inf))


@dataclass(frozen=True)
class BestResponse:
    """A single agent's reported features, with bookkeeping."""

    reported: tuple[float, ...]
    moved: bool
    cost_paid: float


def best_response_threshold(x: float, theta: float, cost, budget) -> BestResponse:
    """Best response to 1[x >= theta] under a 1-D monotone cost.

    Move to the threshold itself when that is affordable and the truthful
    report is negative; otherwise report truthfully.
    """
    b = as_budget(budget)
    x = float(x)
    if x >= theta:
        return BestResponse((x,), False, 0.0)
    c = float(np.asarray(cost.cost(x, theta)))
    if c <= b.value:
        return BestResponse((float(theta),), True, c)
    return BestResponse((x,), False, 0.0)


def best_response_linear(x, w, theta: float, budget) -> BestResponse:
    """Best response to 1[w.x >= theta] for unit w under the L2 cost: the
    orthogonal projection onto the boundary, when affordable."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.shape != w.shape:
        raise DimensionMismatch(f"x has shape {x.shape}, w has shape {w.shape}")
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise NonUnitNormal(f"||w|| = {norm}, expected 1")
    b = as_budget(budget)
    s = float(x @ w)
    if s >= theta:
        return BestResponse(tuple(float(v) for v in x), False, 0.0)
    dist = theta - s
    if dist > b.value:
        return BestResponse(tuple(float(v) for v in x), False, 0.0)
    reported = x + dist * w
    # Make sure rounding cannot strand the report on the negative side.
    short = theta - float(reported @ w)
    if short > 0.0:
        reported = reported + (short + 1e-12 * max(1.0, abs(theta))) * w
    return BestResponse(tuple(float(v) for v in reported), True, dist)


def _is_threshold(f) -> bool:
    return hasattr(f, "j") and hasattr(f, "theta")


def _is_linear(f) -> bool:
    return hasattr(f, "w") and hasattr(f, "theta")


def best_responses(ds: Dataset, f, cost, budget):
    """Vectorized per-record best responses.

    Returns (reported feature matrix, moved mask, cost array); ordering
    matches the input records.
    """
    b = as_budget(budget)
    X = ds.features

    if isinstance(cost, TabularCost):
        pred = f.predict(X)
        source = np.asarray(cost.source_allowed(X), dtype=bool)
        eligible = (pred == 0) & source & (cost.unit_cost <= b.value)
        Xp = X.copy()
        moved = np.zeros(len(ds), dtype=bool)
        costs = np.zeros(len(ds), dtype=np.float64)
        if eligible.any():
            targets = np.atleast_2d(cost.pick_target(X[eligible]))
            ok = cost.target_allowed(targets) & (f.predict(targets) == 1)
            rows = np.where(eligible)[0][ok]
            Xp[rows] = targets[ok]
            moved[rows] = True
            costs[rows] = cost.unit_cost
        return Xp, moved, costs

    if _is_threshold(f):
        j = f.j
        if not 0 <= j < ds.dim:
            raise DimensionMismatch(f"feature index {j} out of range for d={ds.dim}")
        col = X[:, j]
        move_cost = np.asarray(cost.cost(col, f.theta), dtype=np.float64)
        moved = (col < f.theta) & (move_cost <= b.value)
        Xp = X.copy()
        Xp[moved, j] = f.theta
        costs = np.where(moved, move_cost, 0.0)
        return Xp, moved, costs

    if _is_linear(f):
        w = np.asarray(f.w, dtype=np.float64)
        if w.shape[0] != ds.dim:
            raise DimensionMismatch(f"classifier dim {w.shape[0]} != dataset dim {ds.dim}")
        if not isinstance(cost, L2Cost):
            raise ContractError("linear best responses require the L2 cost")
        s = X @ w
        dist = f.theta - s
        moved = (s < f.theta) & (dist <= b.value)
        Xp = X.copy()
        if moved.any():
            Xp[moved] += dist[moved, None] * w
            sp = Xp[moved] @ w
            stranded = sp < f.theta
            if stranded.any():
                rows = np.where(moved)[0][stranded]
                bump = (f.theta - sp[stranded]) + 1e-12 * max(1.0, abs(f.theta))
                Xp[rows] += bump[:, None] * w
        costs = np.where(moved, dist, 0.0)
        return Xp, moved, costs

    raise ContractError(f"unsupported classifier {type(f).__name__} for cost {cost.kind}")


def induce_dataset(ds: Dataset, f, cost, budget) -> Dataset:
    """Dataset after every agent best responds to f; groups, labels and
    record order are untouched."""
    Xp, _, _ = best_responses(ds, f, cost, budget)
    return ds.with_features(Xp)


def agent_utility(f, x, x_prime, cost) -> float:
    """u = f(x') - f(x) - c(x, x'). Positive only for a decision flip
    cheaper than 1."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=np.float64))
    if x.shape != x_prime.shape:
        raise DimensionMismatch("x and x' must share a shape")
    fx = int(f.predict(x[None, :])[0])
    fxp = int(f.predict(x_prime[None, :])[0])
    if isinstance(cost, AbsPowerCost):
        if x.shape[0] != 1:
            raise DimensionMismatch("abs_power cost is 1-D")
        c = float(np.asarray(cost.cost(x[0], x_prime[0])))
    else:
        c = float(np.asarray(cost.cost(x, x_prime)).reshape(-1)[0])
    return fxp - fx - c


@dataclass(frozen=True)
class ManipulableSet:
    """Indices that can afford a decision flip, and their fraction gamma."""

    indices: tuple[int, ...]
    gamma: float


def manipulable_set(ds: Dataset, f, cost, budget) -> ManipulableSet:
    _, moved, _ = best_responses(ds, f, cost, budget)
    idx = np.where(moved)[0]
    return ManipulableSet(tuple(int(i) for i in idx), float(len(idx) / len(ds)))


@dataclass(frozen=True)
class FairnessDecomposition:
    """Unfairness split across the manipulable set and the full sample.

    Restricting a deterministic classifier to its own manipulable set pins
    every decision in the restricted cell, so u_restricted is a diagnostic:
    the combined mixture identity is not asserted anywhere.
    """

    gamma: float
    u_full: float | None
    u_restricted: float | None

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "u_full": self.u_full, "u_restricted": self.u_restricted}


def fairness_decomposition(ds: Dataset, f, cost, budget, metric: Metric) -> FairnessDecomposition:
    ms = manipulable_set(ds, f, cost, budget)
    try:
        u_full = unfairness(ds, f, metric)
    except EmptyConditioningCell:
        u_full = None
    u_restricted = None
    if ms.indices:
        sub = ds.subset(np.asarray(ms.indices))
        try:
            u_restricted = unfairness(sub, f, metric)
        except EmptyConditioningCell:
            u_restricted = None
    return FairnessDecomposition(ms.gamma, u_full, u_restricted)
