"""Point estimators for survival curves, classical and fiducial.

Kaplan-Meier with the three tail conventions, the shifted-denominator
product estimator that equals the mean of the fiducial upper envelope,
Greenwood variances with log-transformed intervals, and the pointwise
median of the continuous fiducial representatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .curves import EvaluationWindow, StepCurve, pointwise_median_curve
from .dataset import SortedDataset
from .errors import DegenerateAtZero
from .sampler import FiducialEnsemble

__all__ = [
    "EstimateWithVariance",
    "kaplan_meier",
    "modified_km",
    "greenwood_ci",
    "fiducial_point_estimate",
    "expected_upper_bound",
    "expected_lower_bound",
    "TAIL_CONVENTIONS",
]

TAIL_CONVENTIONS = ("kml", "kmm", "kmh")


@dataclass(frozen=True)
class EstimateWithVariance:
    """A step-curve estimate with per-knot Greenwood variances.

    ``variance[i]`` is the estimated variance of the survival estimate on
    the i-th knot interval; ``relative_var[i]`` is the corresponding
    cumulative sum d/(K(K-d)) used by the log-transformed interval.
    Delegates evaluation to the wrapped curve, so it can stand in for a
    plain step curve anywhere.
    """

    curve: StepCurve
    variance: np.ndarray
    relative_var: np.ndarray

    def __post_init__(self):
        var = np.atleast_1d(np.asarray(self.variance, dtype=float))
        rel = np.atleast_1d(np.asarray(self.relative_var, dtype=float))
        if var.shape != self.curve.knots.shape or rel.shape != var.shape:
            raise ValueError("variance arrays must align with the curve knots")
        if np.any(var < 0):
            raise ValueError("variances must be nonnegative")
        object.__setattr__(self, "variance", var)
        object.__setattr__(self, "relative_var", rel)

    def __call__(self, t):
        return self.curve(t)

    def value_before(self, t):
        return self.curve.value_before(t)

    def change_points(self):
        return self.curve.change_points()

    def variance_at(self, t) -> float:
        """Greenwood variance at t; 0 before the first event."""
        idx = np.searchsorted(self.curve.knots, t, side="right")
        return float(np.concatenate(([0.0], self.variance))[idx])


def kaplan_meier(sorted_dataset: SortedDataset, tail: str = "kml") -> EstimateWithVariance:
    """Product-limit estimate with Greenwood variances.

    ``tail`` picks the convention for times beyond the largest
    observation, where the product-limit estimate is otherwise undefined:
    ``kml`` drops to 0, ``kmh`` holds the last value, ``kmm`` takes their
    midpoint. The convention only matters when the curve is still
    positive at the largest observation.
    """
    if tail not in TAIL_CONVENTIONS:
        raise ValueError(f"tail must be one of {TAIL_CONVENTIONS}")
    s = sorted_dataset.event_times
    K = sorted_dataset.risk_counts.astype(float)
    d = sorted_dataset.event_counts.astype(float)
    vals = np.cumprod(1.0 - d / K)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.cumsum(np.where(K > d, d / (K * (K - d)), np.inf))
        var = np.where(vals > 0, vals**2 * rel, 0.0)

    last = vals[-1] if vals.size else 1.0
    boundary = float(sorted_dataset.times[-1])
    tail_value = {"kml": 0.0, "kmh": last, "kmm": 0.5 * last}[tail]
    curve = StepCurve(knots=s, values=vals, tail=(boundary, tail_value))
    return EstimateWithVariance(curve=curve, variance=var, relative_var=rel)


def modified_km(sorted_dataset: SortedDataset) -> StepCurve:
    """Product estimate with denominators shifted by one.

    Equals the exact mean of the fiducial upper envelope and stays
    strictly positive at every finite event time.
    """
    s = sorted_dataset.event_times
    K = sorted_dataset.risk_counts.astype(float)
    d = sorted_dataset.event_counts.astype(float)
    return StepCurve(knots=s, values=np.cumprod(1.0 - d / (1.0 + K)))


def greenwood_ci(est: EstimateWithVariance, t: float, level: float) -> tuple[float, float]:
    """Log-transformed normal interval exp(log S +- z * se(log S)).

    The squared standard error of log S is the cumulative Greenwood sum
    d/(K(K-d)) through t. Raises :class:`DegenerateAtZero` when the
    estimate has hit 0, where the log transform is undefined.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie strictly between 0 and 1")
    s_t = float(est.curve(t))
    if s_t <= 0.0:
        raise DegenerateAtZero(f"estimate is 0 at t={t}")
    idx = np.searchsorted(est.curve.knots, t, side="right")
    se = float(np.sqrt(np.concatenate(([0.0], est.relative_var))[idx]))
    z = float(ndtri(0.5 * (1.0 + level)))
    return max(0.0, s_t * np.exp(-z * se)), min(1.0, s_t * np.exp(z * se))


def fiducial_point_estimate(ensemble: FiducialEnsemble, window: EvaluationWindow | None = None) -> StepCurve:
    """Pointwise median of the continuous fiducial representatives."""
    if window is None:
        window = ensemble.window()
    return pointwise_median_curve(ensemble.eval_interp(window.grid), window)


def expected_upper_bound(sorted_dataset: SortedDataset) -> np.ndarray:
    """Exact mean of the fiducial upper envelope at each event time."""
    return modified_km(sorted_dataset)(sorted_dataset.event_times)


def expected_lower_bound(sorted_dataset: SortedDataset) -> np.ndarray:
    """Exact mean of the fiducial lower envelope at each event time.

    At an event time with K at risk and d tied failures the mean equals
    the upper-envelope mean shrunk by (1 - 1/(1 + K - d)): conditioned on
    the assignment through that time, the gap to the next unassigned
    order statistic contributes one extra shifted-denominator factor.
    """
    s = sorted_dataset.event_times
    K = sorted_dataset.risk_counts.astype(float)
    d = sorted_dataset.event_counts.astype(float)
    return expected_upper_bound(sorted_dataset) * (1.0 - 1.0 / (1.0 + K - d))
