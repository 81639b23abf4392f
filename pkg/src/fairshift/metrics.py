"""Fairness and accuracy measurement plus empirical curve analysis.

Rates are exact empirical conditionals (counts over counts); an empty
conditioning cell raises instead of silently contributing a zero, because a
fabricated rate would leak into every unfairness number downstream.

The curve tools (single-crossing, unimodality) operate on estimated
conditional-probability curves and mirror the shape conditions under which
threshold error is valley-shaped and threshold unfairness is hump-shaped.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import DimensionMismatch, EmptyConditioningCell, TooFewDefinedBins, TooShort


class Metric(str, enum.Enum):
    """Group rate used for the unfairness gap."""

    PR = "PR"    # P(f=1 | g)
    TPR = "TPR"  # P(f=1 | y=1, g)
    FPR = "FPR"  # P(f=1 | y=0, g)


def statistical_tol(n: int) -> float:
    """Default tolerance for checks on estimated curves."""
    return 2.0 / math.sqrt(n)


def error_rate(ds: Dataset, f) -> float:
    """Misclassified fraction, exactly (#wrong)/n."""
    pred = f.predict(ds.features)
    return float(np.mean(pred != ds.labels))


def _cell_mask(ds: Dataset, metric: Metric, group: int) -> np.ndarray:
    mask = ds.groups == group
    if metric == Metric.TPR:
        mask = mask & (ds.labels == 1)
    elif metric == Metric.FPR:
        mask = mask & (ds.labels == 0)
    return mask


def group_rate(ds: Dataset, f, metric: Metric, group: int) -> float:
    """Empirical positive rate within the metric's conditioning cell."""
    mask = _cell_mask(ds, metric, group)
    if not mask.any():
        raise EmptyConditioningCell(metric.value, group)
    pred = f.predict(ds.features[mask])
    return float(np.mean(pred == 1))


def unfairness(ds: Dataset, f, metric: Metric) -> float:
    """Absolute gap of the group rates; symmetric in the group labels."""
    return abs(group_rate(ds, f, metric, 1) - group_rate(ds, f, metric, 0))


@dataclass(frozen=True)
class CurveEstimate:
    """Binned conditional-probability estimate over a normalized feature.

    Bins with no samples are undefined: their value is NaN and they are
    excluded from crossing analysis rather than interpolated.
    """

    grid: tuple[float, ...]
    values: tuple[float, ...]
    counts: tuple[int, ...]

    @property
    def defined(self) -> np.ndarray:
        return np.array([c > 0 for c in self.counts])

    def defined_points(self) -> tuple[np.ndarray, np.ndarray]:
        mask = self.defined
        return np.asarray(self.grid)[mask], np.asarray(self.values)[mask]

    def to_dict(self) -> dict:
        return {
            "grid": [float(g) for g in self.grid],
            "values": [None if c == 0 else float(v) for v, c in zip(self.values, self.counts)],
            "counts": [int(c) for c in self.counts],
        }


def estimate_conditional(
    ds: Dataset,
    target: str,
    j: int = 0,
    bins: int = 20,
    condition: int | None = None,
) -> CurveEstimate:
    """Equal-width-binned estimate of P(target=1 | x_j) over [0, 1].

    target is "label" or "group"; condition optionally restricts to records
    with that label (the restriction used for TPR/FPR-style crossings).
    """
    if bins < 2:
        raise TooShort("bins must be >= 2")
    if target not in ("label", "group"):
        raise ValueError(f"target must be 'label' or 'group', got {target!r}")
    if not 0 <= j < ds.dim:
        raise DimensionMismatch(f"feature index {j} out of range for d={ds.dim}")
    x = ds.features[:, j]
    t = (ds.labels if target == "label" else ds.groups).astype(np.float64)
    if condition is not None:
        keep = ds.labels == condition
        x, t = x[keep], t[keep]
    idx = np.minimum((x * bins).astype(np.int64), bins - 1)
    idx = np.maximum(idx, 0)
    counts = np.bincount(idx, minlength=bins)
    sums = np.bincount(idx, weights=t, minlength=bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    centers = (np.arange(bins) + 0.5) / bins
    return CurveEstimate(
        tuple(float(c) for c in centers),
        tuple(float(v) for v in values),
        tuple(int(c) for c in counts),
    )


@dataclass(frozen=True)
class CrossingReport:
    """How close a curve comes to crossing a constant exactly once,
    from below to above."""

    crossing_count: int
    crossing_location: float | None
    max_violation: float
    holds_approximately: bool

    def to_dict(self) -> dict:
        return {
            "crossing_count": self.crossing_count,
            "crossing_location": self.crossing_location,
            "max_violation": self.max_violation,
            "holds_approximately": self.holds_approximately,
        }


def single_crossing_check(curve: CurveEstimate, v: float, tol: float) -> CrossingReport:
    """Check the curve stays <= v before one point and >= v after it.

    crossing_count counts sign changes of (value - v) over the defined bins.
    max_violation is the smallest, over all split points, of the worst
    excursion on the wrong side; the condition holds approximately when that
    violation is within tol.
    """
    grid, values = curve.defined_points()
    m = len(values)
    if m < 2:
        raise TooFewDefinedBins("need at least 2 defined bins")
    diff = values - v

    signs = np.sign(diff)
    count = 0
    last = 0.0
    for s in signs:
        if s != 0.0 and s != last:
            if last != 0.0:
                count += 1
            last = s

    # Split k: bins [0, k) must sit below v, bins [k, m) above it.
    best_violation = math.inf
    best_k = 0
    for k in range(m + 1):
        before = float(np.max(diff[:k], initial=0.0))
        after = float(np.max(-diff[k:], initial=0.0))
        violation = max(before, after)
        if violation < best_violation - 1e-15:
            best_violation = violation
            best_k = k
    location = None
    if 0 < best_k < m:
        g0, g1 = grid[best_k - 1], grid[best_k]
        v0, v1 = values[best_k - 1], values[best_k]
        if v1 != v0:
            t = (v - v0) / (v1 - v0)
            location = float(g0 + np.clip(t, 0.0, 1.0) * (g1 - g0))
        else:
            location = float(0.5 * (g0 + g1))
    elif (signs == 0.0).all():
        location = None  # curve equals v everywhere; degenerate, holds
    return CrossingReport(
        crossing_count=count,
        crossing_location=location,
        max_violation=float(best_violation),
        holds_approximately=bool(best_violation <= tol),
    )


class Orientation(str, enum.Enum):
    POSITIVELY_UNIMODAL = "positively_unimodal"  # rise then fall
    NEGATIVELY_UNIMODAL = "negatively_unimodal"  # fall then rise
    NEITHER = "neither"


@dataclass(frozen=True)
class UnimodalityReport:
    mode_index: int
    orientation: Orientation
    max_violation: float

    def to_dict(self) -> dict:
        return {
            "mode_index": self.mode_index,
            "orientation": self.orientation.value,
            "max_violation": self.max_violation,
        }


def _rise_violation(seq: np.ndarray) -> float:
    """Worst rise in a segment required to be nonincreasing."""
    if len(seq) < 2:
        return 0.0
    return float(np.max(seq - np.minimum.accumulate(seq)))


def _fall_violation(seq: np.ndarray) -> float:
    """Worst drop in a segment required to be nondecreasing."""
    if len(seq) < 2:
        return 0.0
    return float(np.max(np.maximum.accumulate(seq) - seq))


def _best_mode(values: np.ndarray, positive: bool) -> tuple[int, float]:
    """Mode minimizing total monotonicity violation; ties go right so that
    monotone inputs report an endpoint mode."""
    n = len(values)
    best_mode, best_viol = 0, math.inf
    for r in range(n):
        if positive:
            viol = max(_fall_violation(values[: r + 1]), _rise_violation(values[r:]))
        else:
            viol = max(_rise_violation(values[: r + 1]), _fall_violation(values[r:]))
        if viol <= best_viol:
            best_mode, best_viol = r, viol
    return best_mode, best_viol


def unimodality_check(
    values,
    orientation_hint: Orientation | None = None,
    tol: float = 0.0,
) -> UnimodalityReport:
    """Classify a sequence as rise-then-fall, fall-then-rise, or neither.

    The mode is the split minimizing the worst monotonicity excursion of the
    two halves. Monotone sequences satisfy both orientations; ties resolve
    to positively_unimodal (hint wins when it passes).
    """
    values = np.asarray(values, dtype=np.float64)
    if len(values) < 3:
        raise TooShort("need at least 3 values")
    pos_mode, pos_viol = _best_mode(values, positive=True)
    neg_mode, neg_viol = _best_mode(values, positive=False)
    candidates = {
        Orientation.POSITIVELY_UNIMODAL: (pos_mode, pos_viol),
        Orientation.NEGATIVELY_UNIMODAL: (neg_mode, neg_viol),
    }
    if min(pos_viol, neg_viol) > tol:
        mode = pos_mode if pos_viol <= neg_viol else neg_mode
        return UnimodalityReport(mode, Orientation.NEITHER, float(min(pos_viol, neg_viol)))
    if orientation_hint in candidates and candidates[orientation_hint][1] <= tol:
        chosen = orientation_hint
    elif pos_viol <= tol:
        chosen = Orientation.POSITIVELY_UNIMODAL
    else:
        chosen = Orientation.NEGATIVELY_UNIMODAL
    mode, viol = candidates[chosen]
    return UnimodalityReport(mode, chosen, float(viol))
