"""Fiducial inference for survival functions under right censoring.

The package samples distributions over whole survival curves from
censored data, turns them into point estimates, confidence intervals,
simultaneous bands, and curve tests, and ships the classical
comparators (product-limit estimation, Greenwood intervals, weighted
and supremum log-rank tests) plus a reproducible simulation harness.
"""

from .curves import (
    EvaluationWindow,
    LogLinearCurve,
    SmoothCurve,
    StepCurve,
    invert_curve,
    order_statistic_index,
    pointwise_median,
    pointwise_median_curve,
    pointwise_quantile,
    sup_difference,
    sup_distance,
)
from .dataset import (
    SortedDataset,
    SurvivalDataset,
    parse_dataset,
    risk_and_event_counts,
    sort_and_validate,
    split_groups,
    write_csv,
)
from .errors import (
    AllNonIdentifiable,
    DegenerateAtZero,
    EmptyInput,
    FidsurvError,
    MalformedRow,
    MismatchedM,
    NoEvents,
    NoFailures,
    NonIdentifiable,
    UnknownColumn,
)
from .estimators import (
    TAIL_CONVENTIONS,
    EstimateWithVariance,
    expected_lower_bound,
    expected_upper_bound,
    fiducial_point_estimate,
    greenwood_ci,
    kaplan_meier,
    modified_km,
)
from .inference import (
    ConfidenceBand,
    TestReport,
    curvewise_band,
    one_sample_test,
    pointwise_ci,
    quantile_ci,
    two_sample_test,
)
from .logrank import (
    LogRankResult,
    WeightSpec,
    brownian_sup_tail,
    run_all_variants,
    sup_logrank,
    weighted_logrank,
)
from .sampler import (
    FiducialDraw,
    FiducialEnsemble,
    RngStream,
    beta_product_batch,
    beta_product_draw,
    draw_bounds,
    log_linear_curve,
    sample_ensemble,
    sample_permutation,
)

__version__ = "0.1.0"

__all__ = [
    "AllNonIdentifiable",
    "ConfidenceBand",
    "DegenerateAtZero",
    "EmptyInput",
    "EstimateWithVariance",
    "EvaluationWindow",
    "FidsurvError",
    "FiducialDraw",
    "FiducialEnsemble",
    "LogLinearCurve",
    "LogRankResult",
    "MalformedRow",
    "MismatchedM",
    "NoEvents",
    "NoFailures",
    "NonIdentifiable",
    "RngStream",
    "SmoothCurve",
    "SortedDataset",
    "StepCurve",
    "SurvivalDataset",
    "TAIL_CONVENTIONS",
    "TestReport",
    "UnknownColumn",
    "WeightSpec",
    "beta_product_batch",
    "beta_product_draw",
    "brownian_sup_tail",
    "curvewise_band",
    "draw_bounds",
    "expected_lower_bound",
    "expected_upper_bound",
    "fiducial_point_estimate",
    "greenwood_ci",
    "invert_curve",
    "kaplan_meier",
    "log_linear_curve",
    "modified_km",
    "one_sample_test",
    "order_statistic_index",
    "parse_dataset",
    "pointwise_ci",
    "pointwise_median",
    "pointwise_median_curve",
    "pointwise_quantile",
    "quantile_ci",
    "risk_and_event_counts",
    "run_all_variants",
    "sample_ensemble",
    "sample_permutation",
    "sort_and_validate",
    "split_groups",
    "sup_difference",
    "sup_distance",
    "sup_logrank",
    "two_sample_test",
    "weighted_logrank",
    "write_csv",
    "__version__",
]
