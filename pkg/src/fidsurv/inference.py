"""Fiducial inference procedures built on curve ensembles.

Every procedure reduces to order statistics of the ensemble: pointwise
intervals take marginal quantiles, quantile intervals invert each draw,
and the curvewise band and tests rank draws by their sup-norm distance
from the pointwise median curve. All p-values are exact sample
proportions, so m times the p-value is always an integer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .curves import (
    EvaluationWindow,
    StepCurve,
    pointwise_median,
    pointwise_median_curve,
    pointwise_quantile,
    sup_difference,
    sup_distance,
)
from .errors import AllNonIdentifiable, MismatchedM
from .sampler import FiducialEnsemble

__all__ = [
    "ConfidenceBand",
    "TestReport",
    "pointwise_ci",
    "quantile_ci",
    "curvewise_band",
    "one_sample_test",
    "two_sample_test",
]

_FLAVORS = ("interpolation", "conservative")
_SIDES = ("two", "lower", "upper")


@dataclass(frozen=True)
class ConfidenceBand:
    """Sup-norm ball around the pointwise median curve."""

    center: StepCurve
    radius: float
    level: float
    window: EvaluationWindow

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    def lower(self, t):
        return np.clip(self.center(t) - self.radius, 0.0, 1.0)

    def upper(self, t):
        return np.clip(self.center(t) + self.radius, 0.0, 1.0)

    def grid_rows(self) -> list[tuple[float, float, float, float]]:
        """(t, lower, center, upper) rows over the window grid."""
        ts = self.window.grid
        mid = self.center(ts)
        return list(
            zip(
                ts.tolist(),
                np.clip(mid - self.radius, 0.0, 1.0).tolist(),
                np.asarray(mid).tolist(),
                np.clip(mid + self.radius, 0.0, 1.0).tolist(),
            )
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "radius": self.radius,
                "level": self.level,
                "tau": self.window.tau,
                "grid": self.window.grid.tolist(),
                "center": np.asarray(self.center(self.window.grid)).tolist(),
            }
        )


@dataclass(frozen=True)
class TestReport:
    """Outcome of one fiducial hypothesis test.

    ``p_value`` equals ``count / m`` where ``count`` is the number of
    draws at least as extreme as the null curve. ``at_resolution_floor``
    flags p-values below the 1/m resolution of the ensemble.
    """

    statistic: float
    p_value: float
    count: int
    m: int
    sided: str
    null_description: str

    def __post_init__(self):
        if not 0 <= self.p_value <= 1:
            raise ValueError("p-value must lie in [0, 1]")

    @property
    def at_resolution_floor(self) -> bool:
        return self.count == 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "statistic": self.statistic,
                "p_value": self.p_value,
                "count": self.count,
                "m": self.m,
                "sided": self.sided,
                "null": self.null_description,
                "at_resolution_floor": self.at_resolution_floor,
            }
        )


def _check_level(level):
    if not 0 < level < 1:
        raise ValueError("level must lie strictly between 0 and 1")


def pointwise_ci(ensemble: FiducialEnsemble, t: float, level: float, flavor: str = "interpolation") -> tuple[float, float]:
    """Pointwise fiducial interval for S(t).

    The interpolation flavor takes symmetric marginal quantiles of the
    continuous representatives. The conservative flavor takes the lower
    quantile of the lower envelopes and the upper quantile of the upper
    envelopes; it always contains the interpolation interval.
    """
    _check_level(level)
    if flavor not in _FLAVORS:
        raise ValueError(f"flavor must be one of {_FLAVORS}")
    p_lo, p_hi = 0.5 * (1.0 - level), 0.5 * (1.0 + level)
    if flavor == "interpolation":
        vals = ensemble.eval_interp([t])[:, 0]
        return float(pointwise_quantile(vals, p_lo)), float(pointwise_quantile(vals, p_hi))
    lo = pointwise_quantile(ensemble.eval_lower([t])[:, 0], p_lo)
    hi = pointwise_quantile(ensemble.eval_upper([t])[:, 0], p_hi)
    return float(lo), float(hi)


def _invert_ensemble(ensemble: FiducialEnsemble, q: float) -> np.ndarray:
    """Time at which each continuous representative crosses survival q."""
    ensemble._require_interp()
    target = np.log(q)
    at = ensemble.interp_times
    L = ensemble.interp_log
    hit = L <= target
    first = np.argmax(hit, axis=1)
    any_hit = hit.any(axis=1)

    out = np.full(ensemble.m, np.inf)
    rows = np.flatnonzero(any_hit & (first > 0))
    if rows.size:
        j = first[rows]
        l0, l1 = L[rows, j - 1], L[rows, j]
        frac = (target - l0) / (l1 - l0)
        out[rows] = at[j - 1] + frac * (at[j] - at[j - 1])
    # a hit in column 0 means q >= 1, excluded by the caller
    tail_rows = np.flatnonzero(~any_hit)
    if tail_rows.size:
        slopes = ensemble.tail_slopes[tail_rows]
        with np.errstate(divide="ignore"):
            t_tail = at[-1] + (target - L[tail_rows, -1]) / slopes
        out[tail_rows] = np.where(slopes < 0, t_tail, np.inf)
    return out


def quantile_ci(ensemble: FiducialEnsemble, q: float, level: float) -> tuple[float, float]:
    """Fiducial interval for the time at which survival crosses q.

    Each continuous representative is inverted at q; the interval takes
    symmetric order-statistic quantiles of the crossing times. Draws that
    never reach q contribute +inf, so the upper limit is reported as
    open-ended (inf) when enough draws fail to cross.
    """
    _check_level(level)
    if not 0 < q < 1:
        raise ValueError("q must lie strictly between 0 and 1")
    times = _invert_ensemble(ensemble, q)
    if not np.isfinite(times).any():
        raise AllNonIdentifiable(f"no draw reaches survival {q}")
    p_lo, p_hi = 0.5 * (1.0 - level), 0.5 * (1.0 + level)
    return float(pointwise_quantile(times, p_lo)), float(pointwise_quantile(times, p_hi))


def _sup_norms_to_median(values: np.ndarray, med: np.ndarray, signed: bool = False) -> np.ndarray:
    """Per-draw sup over the window of (draw - median step curve).

    ``values`` holds draw evaluations on the window grid, which contains
    every anchor time, so each draw is monotone between consecutive grid
    points while the median step curve is constant there; the sup is then
    attained at a grid point or at a left limit, both covered below.
    """
    diff_at = values - med[None, :]
    diff_before = values[:, 1:] - med[None, :-1]
    if not signed:
        diff_at = np.abs(diff_at)
        diff_before = np.abs(diff_before)
    sup = diff_at.max(axis=1)
    if diff_before.shape[1]:
        sup = np.maximum(sup, diff_before.max(axis=1))
    return sup


def curvewise_band(ensemble: FiducialEnsemble, level: float, window: EvaluationWindow | None = None) -> ConfidenceBand:
    """Simultaneous band: sup-norm ball of fiducial mass ``level``.

    The center is the pointwise median curve; the radius is the
    level-quantile of the draws' sup-norm distances from it.
    """
    _check_level(level)
    if ensemble.m < 2:
        raise ValueError("band requires at least 2 draws")
    if window is None:
        window = ensemble.window()
    values = ensemble.eval_interp(window.grid)
    center = pointwise_median_curve(values, window)
    norms = _sup_norms_to_median(values, np.asarray(center(window.grid)))
    radius = float(pointwise_quantile(norms, level))
    return ConfidenceBand(center=center, radius=radius, level=level, window=window)


def one_sample_test(ensemble: FiducialEnsemble, s0, sided: str = "two", window: EvaluationWindow | None = None) -> TestReport:
    """Test whether the survival function equals the curve ``s0``.

    Draws are ranked by sup-norm distance from the pointwise median
    curve; the p-value is the exact proportion of draws at least as far
    out as ``s0``. One-sided variants rank by the signed sup: ``lower``
    is sensitive to the true curve lying below ``s0`` somewhere, ``upper``
    to it lying above.
    """
    if sided not in _SIDES:
        raise ValueError(f"sided must be one of {_SIDES}")
    if window is None:
        window = ensemble.window()
    values = ensemble.eval_interp(window.grid)
    center = pointwise_median_curve(values, window)
    med = np.asarray(center(window.grid))

    if sided == "two":
        norms = _sup_norms_to_median(values, med)
        l0 = sup_distance(s0, center, window)
    elif sided == "lower":
        norms = _sup_norms_to_median(values, med, signed=True)
        l0 = sup_difference(s0, center, window)
    else:
        norms = _sup_norms_to_median(-values, -med, signed=True)
        l0 = sup_difference(center, s0, window)
    count = int(np.count_nonzero(norms >= l0))
    return TestReport(
        statistic=float(l0),
        p_value=count / ensemble.m,
        count=count,
        m=ensemble.m,
        sided=sided,
        null_description="S = S0",
    )


def two_sample_test(
    ensemble_a: FiducialEnsemble,
    ensemble_b: FiducialEnsemble,
    delta0=None,
    window: EvaluationWindow | None = None,
) -> TestReport:
    """Test whether two survival functions differ by the curve ``delta0``.

    Draw j of each ensemble is paired; difference curves are evaluated on
    the pooled window grid, centered at their pointwise median, and
    ranked by sup over the grid. ``delta0`` defaults to the zero
    function (no difference); it may be a callable of t or a constant.
    """
    if ensemble_a.m != ensemble_b.m:
        raise MismatchedM(f"ensemble sizes differ: {ensemble_a.m} vs {ensemble_b.m}")
    if window is None:
        window = EvaluationWindow.for_two_samples(ensemble_a.data, ensemble_b.data)
    ts = window.grid
    diffs = ensemble_a.eval_interp(ts) - ensemble_b.eval_interp(ts)
    med = pointwise_median(diffs)
    if delta0 is None:
        d0 = np.zeros_like(ts)
    elif callable(delta0):
        d0 = np.asarray(delta0(ts), dtype=float)
    else:
        d0 = np.full_like(ts, float(delta0))
    l0 = float(np.abs(d0 - med).max())
    norms = np.abs(diffs - med[None, :]).max(axis=1)
    count = int(np.count_nonzero(norms >= l0))
    return TestReport(
        statistic=l0,
        p_value=count / ensemble_a.m,
        count=count,
        m=ensemble_a.m,
        sided="two",
        null_description="S_A - S_B = delta0",
    )
