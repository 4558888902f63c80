"""Survival curve types and exact curve arithmetic.

Two curve families cover everything the fiducial machinery produces:
right-continuous step curves (envelopes, product-limit estimates, grid
medians) and curves that are piecewise linear in log survival
(continuous fiducial representatives). Both start at survival 1 at
time 0 and are nonincreasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonIdentifiable

_VALUE_SLACK = 1e-12


@dataclass(frozen=True)
class StepCurve:
    """Right-continuous step function on [0, inf).

    ``values[i]`` is the value on ``[knots[i], knots[i+1])``; before the
    first knot the curve equals 1, after the last knot it holds its final
    value. ``tail`` optionally overrides the value strictly beyond a
    boundary time, for estimators that are undefined past the largest
    observation: a pair ``(boundary, value)`` means the curve equals
    ``value`` for t > boundary.
    """

    knots: np.ndarray
    values: np.ndarray
    tail: tuple[float, float] | None = None

    def __post_init__(self):
        knots = np.atleast_1d(np.asarray(self.knots, dtype=float))
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if knots.shape != values.shape or knots.ndim != 1:
            raise ValueError("knots and values must be aligned 1-d arrays")
        if knots.size and np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if np.any(values < -_VALUE_SLACK) or np.any(values > 1 + _VALUE_SLACK):
            raise ValueError("step curve values must lie in [0, 1]")
        if values.size > 1 and np.any(np.diff(values) > _VALUE_SLACK):
            raise ValueError("step curve values must be nonincreasing")
        if values.size and values[0] > 1 + _VALUE_SLACK:
            raise ValueError("curve cannot exceed 1")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", np.clip(values, 0.0, 1.0))
        if self.tail is not None:
            boundary, value = self.tail
            last = self.values[-1] if self.values.size else 1.0
            if value > last + _VALUE_SLACK:
                raise ValueError("tail value cannot exceed the final curve value")
            object.__setattr__(self, "tail", (float(boundary), float(value)))

    def __call__(self, t):
        """Evaluate S(t), right-continuous."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, t, side="right")
        out = np.concatenate(([1.0], self.values))[idx]
        if self.tail is not None:
            out = np.where(t > self.tail[0], self.tail[1], out)
        return out if out.ndim else float(out)

    def value_before(self, t):
        """Left limit S(t-); equals 1 at and below the first knot."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, t, side="left")
        out = np.concatenate(([1.0], self.values))[idx]
        if self.tail is not None:
            out = np.where(t > self.tail[0], self.tail[1], out)
        return out if out.ndim else float(out)

    def change_points(self):
        if self.tail is not None:
            return np.union1d(self.knots, [self.tail[0]])
        return self.knots


@dataclass(frozen=True)
class LogLinearCurve:
    """Continuous survival curve, piecewise linear in log survival.

    ``log_values[i]`` is log S at ``anchor_times[i]``; the first anchor is
    time 0 with log value 0 (survival 1) unless the data pin something
    else. Beyond the last anchor the log survival continues with slope
    ``tail_slope`` (nonpositive), so the curve stays positive for finite t.
    """

    anchor_times: np.ndarray
    log_values: np.ndarray
    tail_slope: float

    def __post_init__(self):
        at = np.atleast_1d(np.asarray(self.anchor_times, dtype=float))
        lv = np.atleast_1d(np.asarray(self.log_values, dtype=float))
        if at.shape != lv.shape or at.ndim != 1 or at.size == 0:
            raise ValueError("anchors must be aligned nonempty 1-d arrays")
        if at[0] != 0.0:
            raise ValueError("first anchor must be at time 0")
        if at.size > 1 and np.any(np.diff(at) <= 0):
            raise ValueError("anchor times must be strictly increasing")
        if np.any(lv > _VALUE_SLACK):
            raise ValueError("log survival must be nonpositive")
        if lv.size > 1 and np.any(np.diff(lv) > _VALUE_SLACK):
            raise ValueError("log survival must be nonincreasing")
        if self.tail_slope > _VALUE_SLACK:
            raise ValueError("tail slope must be nonpositive")
        object.__setattr__(self, "anchor_times", at)
        object.__setattr__(self, "log_values", np.minimum(lv, 0.0))
        object.__setattr__(self, "tail_slope", float(min(self.tail_slope, 0.0)))

    def log_eval(self, t):
        t = np.asarray(t, dtype=float)
        at, lv = self.anchor_times, self.log_values
        out = np.interp(t, at, lv)
        beyond = t > at[-1]
        if np.any(beyond):
            out = np.where(beyond, lv[-1] + self.tail_slope * (t - at[-1]), out)
        return out

    def __call__(self, t):
        out = np.exp(self.log_eval(t))
        return out if out.ndim else float(out)

    # continuous curve, the left limit is the value itself
    value_before = __call__

    def change_points(self):
        return self.anchor_times[self.anchor_times > 0]

    def segment_parameters(self):
        """Per-segment (start, end, slope, intercept) of log survival.

        The final row describes the tail with end = +inf.
        """
        at, lv = self.anchor_times, self.log_values
        starts = at
        ends = np.append(at[1:], np.inf)
        with np.errstate(invalid="ignore"):
            slopes = np.append(np.diff(lv) / np.diff(at), self.tail_slope)
        intercepts = lv - slopes * at
        return starts, ends, slopes, intercepts


class SmoothCurve:
    """Adapter exposing a plain function as a curve.

    The wrapped function must be continuous and nonincreasing on [0, inf)
    (e.g. a true survival function); under that assumption the supremum
    helpers below stay exact, since the difference against a step or
    log-linear curve is monotone between the other curve's change points.
    """

    def __init__(self, fn):
        self._fn = fn

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(self._fn(t), dtype=float)
        return out if out.ndim else float(out)

    value_before = __call__

    def change_points(self):
        return np.empty(0)


@dataclass(frozen=True)
class EvaluationWindow:
    """Evaluation window [0, tau] with its grid of relevant times.

    The grid is the sorted union of curve knots inside the window plus the
    endpoints 0 and tau.
    """

    tau: float
    grid: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau <= 0:
            raise ValueError("tau must be positive and finite")
        grid = np.union1d(np.asarray(self.grid, dtype=float), [0.0, self.tau])
        grid = grid[(grid >= 0.0) & (grid <= self.tau)]
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "grid", grid)

    @classmethod
    def for_dataset(cls, sorted_dataset, tau=None):
        """Window ending at the largest failure time by default."""
        if tau is None:
            if sorted_dataset.event_times.size == 0:
                raise ValueError("no failures: supply tau explicitly")
            tau = float(sorted_dataset.event_times[-1])
        times = sorted_dataset.times
        return cls(tau=tau, grid=times[times <= tau])

    @classmethod
    def for_two_samples(cls, sorted_a, sorted_b, tau=None):
        """Window ending at the smaller of the two largest failure times."""
        if tau is None:
            if sorted_a.event_times.size == 0 or sorted_b.event_times.size == 0:
                raise ValueError("no failures: supply tau explicitly")
            tau = float(min(sorted_a.event_times[-1], sorted_b.event_times[-1]))
        pooled = np.union1d(sorted_a.times, sorted_b.times)
        return cls(tau=tau, grid=pooled[pooled <= tau])


def order_statistic_index(m: int, p: float) -> int:
    """0-based index of the ceil(m*p)-th order statistic, clamped to range.

    The small guard keeps products like 1000 * 0.025 from ceiling to 26
    through floating-point representation error.
    """
    k = int(np.ceil(m * p - 1e-9))
    return min(max(k, 1), m) - 1


def pointwise_quantile(values: np.ndarray, p: float) -> np.ndarray:
    """Order-statistic quantile down the first axis: the ceil(m*p)-th smallest."""
    values = np.asarray(values)
    m = values.shape[0]
    k = order_statistic_index(m, p)
    return np.partition(values, k, axis=0)[k]


def pointwise_median(values: np.ndarray) -> np.ndarray:
    """Columnwise median; for even m, the mean of the two central order statistics."""
    values = np.asarray(values)
    m = values.shape[0]
    if m % 2:
        return np.partition(values, m // 2, axis=0)[m // 2]
    part = np.partition(values, [m // 2 - 1, m // 2], axis=0)
    return 0.5 * (part[m // 2 - 1] + part[m // 2])


def pointwise_median_curve(values: np.ndarray, window: EvaluationWindow) -> StepCurve:
    """Step curve through the pointwise medians on the window grid.

    ``values`` has one row per draw, one column per grid time.
    """
    med = pointwise_median(values)
    med = np.minimum.accumulate(np.clip(med, 0.0, 1.0))
    return StepCurve(knots=window.grid, values=med)


def invert_curve(curve, q: float) -> float:
    """Smallest time t with S(t) <= q, for a nonincreasing curve.

    Raises :class:`NonIdentifiable` when the curve never reaches q.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie strictly between 0 and 1")
    if isinstance(curve, StepCurve):
        reached = np.flatnonzero(curve.values <= q)
        if reached.size:
            return float(curve.knots[reached[0]])
        if curve.tail is not None and curve.tail[1] <= q:
            # infimum of {t > boundary}; the boundary is the natural report
            return float(curve.tail[0])
        raise NonIdentifiable(f"curve never reaches survival {q}")
    if isinstance(curve, LogLinearCurve):
        target = np.log(q)
        lv, at = curve.log_values, curve.anchor_times
        below = np.flatnonzero(lv <= target)
        if below.size:
            j = int(below[0])
            if j == 0:
                return float(at[0])
            frac = (target - lv[j - 1]) / (lv[j] - lv[j - 1])
            return float(at[j - 1] + frac * (at[j] - at[j - 1]))
        if curve.tail_slope < 0:
            return float(at[-1] + (target - lv[-1]) / curve.tail_slope)
        raise NonIdentifiable(f"curve never reaches survival {q}")
    raise TypeError(f"cannot invert {type(curve).__name__}")


def _candidate_times(a, b, tau: float) -> np.ndarray:
    pts = [np.asarray([0.0, tau])]
    for curve in (a, b):
        cp = curve.change_points()
        pts.append(cp[(cp > 0) & (cp <= tau)])
    return np.unique(np.concatenate(pts))


def _loglinear_interior_extrema(a: LogLinearCurve, b: LogLinearCurve, tau: float) -> np.ndarray:
    """Interior critical points of exp(l_a) - exp(l_b) on shared segments."""
    bounds = _candidate_times(a, b, tau)
    out = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        seg = []
        for curve in (a, b):
            l0 = float(curve.log_eval(np.asarray(lo)))
            l1 = float(curve.log_eval(np.asarray(hi)))
            slope = (l1 - l0) / (hi - lo)
            seg.append((slope, l0 - slope * lo))
        (b1, a1), (b2, a2) = seg
        if b1 == b2 or b1 == 0.0 or b2 == 0.0 or np.sign(b1) != np.sign(b2):
            continue
        # d/dt (e^{a1+b1 t} - e^{a2+b2 t}) = 0
        t_star = (a2 - a1 + np.log(b2 / b1)) / (b1 - b2)
        if lo < t_star < hi:
            out.append(t_star)
    return np.asarray(out)


def _evaluation_times(a, b, tau: float) -> np.ndarray:
    ts = _candidate_times(a, b, tau)
    if isinstance(a, LogLinearCurve) and isinstance(b, LogLinearCurve):
        extra = _loglinear_interior_extrema(a, b, tau)
        if extra.size:
            ts = np.union1d(ts, extra)
    return ts


def sup_distance(a, b, window) -> float:
    """Exact supremum of |a - b| over [0, tau].

    Evaluates both curves at every change point of either curve, at the
    left limits of those points, at the window endpoints, and (for a pair
    of log-linear curves) at interior extrema of the difference. For
    step/step, step/log-linear, and smooth/monotone pairs the difference
    is monotone between consecutive change points, so those evaluation
    points are exhaustive.
    """
    tau = window.tau if isinstance(window, EvaluationWindow) else float(window)
    ts = _evaluation_times(a, b, tau)
    gap_at = np.abs(np.asarray(a(ts)) - np.asarray(b(ts)))
    gap_before = np.abs(np.asarray(a.value_before(ts)) - np.asarray(b.value_before(ts)))
    return float(max(gap_at.max(), gap_before.max()))


def sup_difference(a, b, window) -> float:
    """Exact supremum of the signed difference a - b over [0, tau].

    Same evaluation points as :func:`sup_distance`; the candidates are
    critical points of the difference, so they locate signed extrema too.
    """
    tau = window.tau if isinstance(window, EvaluationWindow) else float(window)
    ts = _evaluation_times(a, b, tau)
    gap_at = np.asarray(a(ts)) - np.asarray(b(ts))
    gap_before = np.asarray(a.value_before(ts)) - np.asarray(b.value_before(ts))
    return float(max(gap_at.max(), gap_before.max()))
