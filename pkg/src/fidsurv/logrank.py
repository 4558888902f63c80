"""Two-sample weighted log-rank tests and their supremum versions.

The family differs only in the weight attached to each pooled event
time: constant (LR), the pooled at-risk count (GW), its square root
(TW), a left-continuous shifted-product survival estimate (PP), the
same damped by K/(K+1) (MPP), or powers of the pooled product-limit
left limit (FH). Each weight comes in a fixed-time chi-squared form and
a supremum (maximally selected partial sum) form referred to the
boundary-crossing law of a Brownian motion on [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .dataset import SortedDataset
from .errors import NoEvents

__all__ = [
    "WeightSpec",
    "LogRankResult",
    "weighted_logrank",
    "sup_logrank",
    "brownian_sup_tail",
    "run_all_variants",
    "WEIGHT_KINDS",
    "VARIANT_NAMES",
]

WEIGHT_KINDS = ("LR", "GW", "TW", "PP", "MPP", "FH")
VARIANT_NAMES = ("LR", "GW", "TW", "PP", "MPP", "FH", "SLR", "SGW", "STW", "SPP", "SMPP", "SFH")


@dataclass(frozen=True)
class WeightSpec:
    """Weight family member; FH exponents default to (1, 1)."""

    kind: str
    fh_p: float = 1.0
    fh_q: float = 1.0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"kind must be one of {WEIGHT_KINDS}")
        if self.fh_p < 0 or self.fh_q < 0:
            raise ValueError("FH exponents must be nonnegative")

    def label(self) -> str:
        if self.kind == "FH":
            return f"FH({self.fh_p:g},{self.fh_q:g})"
        return self.kind


@dataclass(frozen=True)
class LogRankResult:
    """Statistic, p-value, and the per-event-time decomposition."""

    test: str
    form: str  # "chisq" or "sup"
    statistic: float
    p_value: float
    score: float  # weighted sum of observed-minus-expected
    variance: float  # weighted variance total
    event_times: np.ndarray
    o_minus_e: np.ndarray  # unweighted per-time contributions for group A
    var_terms: np.ndarray  # unweighted hypergeometric variances
    weights: np.ndarray


def _failures_at(sd: SortedDataset, s: np.ndarray) -> np.ndarray:
    d = np.zeros(s.size)
    if sd.event_times.size:
        idx = np.searchsorted(sd.event_times, s)
        safe = np.minimum(idx, sd.event_times.size - 1)
        match = (idx < sd.event_times.size) & (sd.event_times[safe] == s)
        d[match] = sd.event_counts[idx[match]]
    return d


def _pooled_table(a: SortedDataset, b: SortedDataset):
    """Per pooled-event-time counts: times, K_a, K_b, d_a, d_b."""
    s = np.union1d(a.event_times, b.event_times)
    if s.size == 0:
        raise NoEvents("pooled sample has no failures")
    k_a = a.n - np.searchsorted(a.times, s, side="left")
    k_b = b.n - np.searchsorted(b.times, s, side="left")
    return s, k_a.astype(float), k_b.astype(float), _failures_at(a, s), _failures_at(b, s)


def _weights(spec: WeightSpec, k: np.ndarray, d: np.ndarray) -> np.ndarray:
    if spec.kind == "LR":
        return np.ones_like(k)
    if spec.kind == "GW":
        return k.copy()
    if spec.kind == "TW":
        return np.sqrt(k)
    if spec.kind == "PP":
        surv = np.cumprod(1.0 - d / (k + 1.0))
        return np.concatenate(([1.0], surv[:-1]))  # left-continuous
    if spec.kind == "MPP":
        surv = np.cumprod(1.0 - d / (k + 1.0))
        return np.concatenate(([1.0], surv[:-1])) * k / (k + 1.0)
    km = np.cumprod(1.0 - d / k)
    km_left = np.concatenate(([1.0], km[:-1]))
    return np.power(km_left, spec.fh_p) * np.power(1.0 - km_left, spec.fh_q)


def _decomposition(a: SortedDataset, b: SortedDataset, spec: WeightSpec):
    s, k_a, k_b, d_a, d_b = _pooled_table(a, b)
    k = k_a + k_b
    d = d_a + d_b
    o_minus_e = d_a - d * k_a / k
    with np.errstate(invalid="ignore", divide="ignore"):
        var = np.where(k > 1.0, d * (k_a / k) * (k_b / k) * (k - d) / (k - 1.0), 0.0)
    w = _weights(spec, k, d)
    return s, o_minus_e, var, w


def weighted_logrank(a: SortedDataset, b: SortedDataset, spec: WeightSpec = WeightSpec("LR")) -> LogRankResult:
    """Fixed-time weighted log-rank test, statistic referred to chi-squared(1)."""
    s, o_minus_e, var, w = _decomposition(a, b, spec)
    score = float(np.sum(w * o_minus_e))
    variance = float(np.sum(w**2 * var))
    if variance > 0.0:
        stat = score**2 / variance
        p = float(chi2.sf(stat, df=1))
    else:
        stat, p = 0.0, 1.0
    return LogRankResult(
        test=spec.label(),
        form="chisq",
        statistic=float(stat),
        p_value=p,
        score=score,
        variance=variance,
        event_times=s,
        o_minus_e=o_minus_e,
        var_terms=var,
        weights=w,
    )


def sup_logrank(a: SortedDataset, b: SortedDataset, spec: WeightSpec = WeightSpec("LR")) -> LogRankResult:
    """Supremum version: largest absolute standardized partial sum.

    The running weighted observed-minus-expected process is standardized
    by the total variance and its largest absolute excursion is referred
    to the law of sup |W| over [0, 1] for a standard Brownian motion W.
    """
    s, o_minus_e, var, w = _decomposition(a, b, spec)
    partial = np.cumsum(w * o_minus_e)
    variance = float(np.sum(w**2 * var))
    if variance > 0.0:
        stat = float(np.abs(partial).max() / math.sqrt(variance))
        p = brownian_sup_tail(stat) if stat > 0.0 else 1.0
    else:
        stat, p = 0.0, 1.0
    return LogRankResult(
        test="S" + spec.label(),
        form="sup",
        statistic=stat,
        p_value=p,
        score=float(partial[-1]),
        variance=variance,
        event_times=s,
        o_minus_e=o_minus_e,
        var_terms=var,
        weights=w,
    )


def brownian_sup_tail(x: float, tol: float = 1e-12, max_terms: int = 1_000_000) -> float:
    """P(sup over [0,1] of |W(s)| >= x) for standard Brownian motion W.

    Alternating series 1 - (4/pi) * sum_k (-1)^k/(2k+1) exp(-pi^2 (2k+1)^2 / (8x^2)),
    truncated once the next term falls below ``tol`` in magnitude.
    """
    if x <= 0.0:
        raise ValueError("x must be positive")
    coeff = math.pi**2 / (8.0 * x * x)
    total = 0.0
    for k in range(max_terms):
        odd = 2 * k + 1
        term = math.exp(-coeff * odd * odd) / odd
        if term < tol:
            break
        total += term if k % 2 == 0 else -term
    return min(1.0, max(0.0, 1.0 - 4.0 / math.pi * total))


def run_all_variants(a: SortedDataset, b: SortedDataset, fh=(1.0, 1.0)) -> dict[str, LogRankResult]:
    """All twelve comparator tests keyed by their short names (S* = sup form)."""
    out = {}
    for kind in WEIGHT_KINDS:
        spec = WeightSpec(kind, *fh) if kind == "FH" else WeightSpec(kind)
        out[kind] = weighted_logrank(a, b, spec)
        out["S" + kind] = sup_logrank(a, b, spec)
    return out
