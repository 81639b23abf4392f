"""fairshift: measure how strategic feature manipulation shifts the
fairness and accuracy of baseline vs. group-fair classifiers."""

from .core import (
    AgentRecord,
    ColumnSchema,
    Dataset,
    SyntheticSpec,
    CellSpec,
    generate_synthetic,
    load_dataset,
    normalize_feature,
    write_dataset,
)
from .metrics import (
    CrossingReport,
    CurveEstimate,
    Metric,
    Orientation,
    UnimodalityReport,
    error_rate,
    estimate_conditional,
    group_rate,
    single_crossing_check,
    unfairness,
    unimodality_check,
)
from .strategic import (
    AbsPowerCost,
    BestResponse,
    Budget,
    L2Cost,
    TabularCost,
    agent_utility,
    best_response_linear,
    best_response_threshold,
    fairness_decomposition,
    induce_dataset,
    manipulable_set,
)
from .threshold_lab import (
    BudgetSweepResult,
    ReversalReport,
    ThresholdClassifier,
    ThresholdSweep,
    accuracy_reversal_check,
    budget_sweep,
    detect_fairness_reversal,
    max_unfair_threshold,
    optimal_alpha_fair_threshold,
    optimal_base_threshold,
    shifted_threshold,
    sufficient_condition_check,
    sweep_thresholds,
)
from .linear_lab import (
    LinearClassifier,
    LogisticLink,
    MonotoneIndexSpec,
    RegionMeasures,
    construct_adversarial_cost,
    fairness_recovery_shift,
    generate_monotone_index,
    linear_budget_sweep,
    region_measures,
    selectivity_check,
    subset_bound_report,
    train_base_linear,
    train_fair_linear,
)

__version__ = "0.1.0"
