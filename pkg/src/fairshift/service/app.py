"""Analysis service: stateless endpoints wrapping the library.

Contract errors (bad parameters, malformed specs) come back as 422 and data
errors (degenerate samples, undefined cells where a value is required) as
400, so clients can map them to distinct exit codes.
"""

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..core import pearson
from ..errors import (
    ContractError,
    DataError,
    EmptyConditioningCell,
    NoCrossingFound,
    TooFewDefinedBins,
)
from ..metrics import (
    Metric,
    Orientation,
    estimate_conditional,
    statistical_tol,
    unimodality_check,
)
from ..strategic import AbsPowerCost, L2Cost
from ..threshold_lab import (
    budget_sweep,
    detect_fairness_reversal,
    max_unfair_threshold,
    optimal_alpha_fair_threshold,
    optimal_base_threshold,
    sufficient_condition_check,
    sweep_thresholds,
)
from ..linear_lab import linear_budget_sweep, train_base_linear, train_fair_linear
from .models import (
    BudgetRow,
    BudgetSweepRequest,
    BudgetSweepResponse,
    ConditionsRequest,
    ConditionsResponse,
    FeatureConditions,
    ReportRequest,
    ReportResponse,
    ReportRow,
    DatasetPayload,
    SweepRow,
    SynthRequest,
    SynthResponse,
    ThresholdSweepRequest,
    ThresholdSweepResponse,
)

app = FastAPI(title="fairshift", version=__version__)


@app.exception_handler(DataError)
async def data_error_handler(request: Request, exc: DataError):
    return JSONResponse(
        status_code=400, content={"error": type(exc).__name__, "message": str(exc)}
    )


@app.exception_handler(ContractError)
async def contract_error_handler(request: Request, exc: ContractError):
    return JSONResponse(
        status_code=422, content={"error": type(exc).__name__, "message": str(exc)}
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/synthetic/generate", response_model=SynthResponse)
def synthetic_generate(req: SynthRequest) -> SynthResponse:
    ds = req.source.resolve()
    return SynthResponse(dataset=DatasetPayload.from_dataset(ds))


@app.post("/threshold/sweep", response_model=ThresholdSweepResponse)
def threshold_sweep(req: ThresholdSweepRequest) -> ThresholdSweepResponse:
    ds = req.source.resolve()
    sweep = sweep_thresholds(ds, req.feature, req.grid_size, req.metric)
    theta_c = optimal_base_threshold(sweep)
    theta_f = theta_u = degenerate = None
    if sweep.unfairness_defined:
        theta_f = optimal_alpha_fair_threshold(sweep, req.alpha)
        theta_u = max_unfair_threshold(sweep)
        degenerate = bool(np.ptp(sweep.unfairness) == 0.0)
    suff = suff_err = None
    try:
        suff = sufficient_condition_check(ds, req.feature, req.metric, bins=req.bins).to_dict()
    except (NoCrossingFound, EmptyConditioningCell, TooFewDefinedBins) as exc:
        suff_err = f"{type(exc).__name__}: {exc}"
    return ThresholdSweepResponse(
        rows=[SweepRow(**r) for r in sweep.to_rows()],
        theta_c=theta_c,
        theta_f=theta_f,
        theta_u=theta_u,
        theta_u_degenerate=degenerate,
        alpha=req.alpha,
        metric=req.metric,
        sufficient_condition=suff,
        sufficient_condition_error=suff_err,
    )


def _budget_grid(grid) -> np.ndarray:
    if grid.log:
        return np.geomspace(grid.min, grid.max, grid.count)
    return np.linspace(grid.min, grid.max, grid.count)


def _tradeoff_corr(res) -> float | None:
    """Correlation between error increments and unfairness decrements of
    the fair classifier across the budget grid (diagnostic only)."""
    ok = ~np.isnan(res.unfair_f)
    if ok.sum() < 3:
        return None
    d_err = np.diff(res.error_f[ok])
    d_unf = np.diff(res.unfair_f[ok])
    if np.ptp(d_err) == 0.0 or np.ptp(d_unf) == 0.0:
        return None
    return pearson(d_err, -d_unf)


@app.post("/budget/sweep", response_model=BudgetSweepResponse)
def budget_sweep_endpoint(req: BudgetSweepRequest) -> BudgetSweepResponse:
    ds = req.source.resolve()
    budgets = _budget_grid(req.budgets)
    classifier_c = classifier_f = None
    if req.mode == "threshold":
        sweep = sweep_thresholds(ds, req.feature, req.grid_size, req.metric)
        theta_c = optimal_base_threshold(sweep)
        theta_f = optimal_alpha_fair_threshold(sweep, req.alpha)
        cost = AbsPowerCost(req.cost_exponent) if req.cost_kind == "abs_power" else L2Cost()
        res = budget_sweep(ds, theta_c, theta_f, cost, budgets, req.metric, j=req.feature)
        classifier_c = {"theta": theta_c, "j": req.feature}
        classifier_f = {"theta": theta_f, "j": req.feature}
    else:
        if req.cost_kind != "l2":
            raise ContractError("linear mode uses the l2 cost")
        t = req.training
        f_c = train_base_linear(ds, t.epochs, t.step, t.seed)
        f_f = train_fair_linear(ds, req.alpha, req.metric, t.epochs, t.step, t.seed)
        res = linear_budget_sweep(ds, f_c, f_f, budgets, req.metric)
        theta_c, theta_f = f_c.theta, f_f.theta
        classifier_c = f_c.to_dict()
        classifier_f = f_f.to_dict()
    report = detect_fairness_reversal(res)
    return BudgetSweepResponse(
        rows=[BudgetRow(**r) for r in res.to_rows()],
        mode=req.mode,
        metric=req.metric,
        theta_c=theta_c,
        theta_f=theta_f,
        classifier_c=classifier_c,
        classifier_f=classifier_f,
        reversal=report.to_dict(),
        error_unfairness_tradeoff_corr=_tradeoff_corr(res),
    )


def _conditional_independence_gap(ds, j: int, bins: int) -> list[float | None]:
    """Per-bin |P(g=1 | x, y=1) - P(g=1 | x, y=0)|, None where either side
    is undefined. Reported without judgment."""
    if not ds.has_both_labels:
        return [None] * bins
    pos = estimate_conditional(ds, "group", j, bins, condition=1)
    neg = estimate_conditional(ds, "group", j, bins, condition=0)
    out: list[float | None] = []
    for vp, cp, vn, cn in zip(pos.values, pos.counts, neg.values, neg.counts):
        out.append(abs(vp - vn) if cp > 0 and cn > 0 else None)
    return out


@app.post("/conditions/check", response_model=ConditionsResponse)
def conditions_check(req: ConditionsRequest) -> ConditionsResponse:
    ds = req.source.resolve()
    features = [req.feature] if req.feature is not None else list(range(ds.dim))
    tol = statistical_tol(len(ds))
    results = []
    for j in features:
        label_crossing = group_crossing = x_y = x_g = None
        err_uni = unf_uni = None
        reason = None
        try:
            suff = sufficient_condition_check(
                ds, j, req.metric, bins=req.bins, grid_size=req.grid_size
            )
            label_crossing = suff.label_crossing.to_dict()
            group_crossing = suff.group_crossing.to_dict()
            x_y, x_g = suff.x_y, suff.x_g
        except (NoCrossingFound, EmptyConditioningCell, TooFewDefinedBins) as exc:
            reason = f"{type(exc).__name__}: {exc}"
        sweep = sweep_thresholds(ds, j, req.grid_size, req.metric)
        err_uni = unimodality_check(
            sweep.error, Orientation.NEGATIVELY_UNIMODAL, tol
        ).to_dict()
        if sweep.unfairness_defined:
            unf_uni = unimodality_check(
                sweep.unfairness, Orientation.POSITIVELY_UNIMODAL, tol
            ).to_dict()
        elif reason is None:
            reason = "EmptyConditioningCell: unfairness undefined"
        results.append(
            FeatureConditions(
                feature=j,
                label_crossing=label_crossing,
                group_crossing=group_crossing,
                x_y=x_y,
                x_g=x_g,
                error_unimodality=err_uni,
                unfairness_unimodality=unf_uni,
                conditional_independence_gap=_conditional_independence_gap(ds, j, req.bins),
                undefined_reason=reason,
            )
        )
    return ConditionsResponse(metric=req.metric, features=results)


def _report_row(run) -> ReportRow:
    config = run.config or {}
    mode = config.get("mode", "threshold")
    theta_c = theta_f = magnitude = None
    detected = None
    if run.summary:
        theta_c = run.summary.get("theta_c")
        theta_f = run.summary.get("theta_f")
    if run.reversal:
        theta_c = run.reversal.get("theta_c", theta_c)
        theta_f = run.reversal.get("theta_f", theta_f)
        intervals = run.reversal.get("reversal_intervals", [])
        detected = any(not iv.get("degenerate", False) for iv in intervals)
        magnitude = run.reversal.get("magnitude")
    selective = None
    if theta_c is not None and theta_f is not None:
        selective = bool(theta_c < theta_f)
    return ReportRow(
        run=run.name,
        mode=mode,
        feature=config.get("feature"),
        metric=config.get("metric"),
        theta_c=theta_c,
        theta_f=theta_f,
        selective=selective,
        reversal_detected=detected,
        reversal_magnitude=magnitude,
    )


@app.post("/report/aggregate", response_model=ReportResponse)
def report_aggregate(req: ReportRequest) -> ReportResponse:
    rows = [_report_row(run) for run in req.runs]
    with_thetas = [r for r in rows if r.selective is not None]
    count = sum(1 for r in with_thetas if r.selective)
    return ReportResponse(
        rows=rows,
        selective_count=count,
        total_with_thetas=len(with_thetas),
        selective_fraction=f"{count}/{len(with_thetas)}",
    )
