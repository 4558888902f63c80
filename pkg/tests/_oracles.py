"""Independent reference implementations used only by the tests.

Everything here is derived from first principles (constraint checking,
dense grids, alternative series), deliberately NOT reusing the package's
algorithms, so agreement between the two is evidence of correctness.
"""

import itertools
import math

import numpy as np
from scipy.stats import norm


def feasible_assignments(status):
    """All assignments of order-statistic indices consistent with the data.

    An assignment maps the i-th smallest observation to a distinct
    uniform order statistic. Writing the constraint set of distribution
    functions explicitly and taking the minimal nondecreasing cdf shows
    an assignment is feasible iff every observation's order statistic
    exceeds those of all earlier failures: a failure pins the cdf level
    at its uniform, while a censored observation only needs its uniform
    to sit above the current level.
    """
    n = len(status)
    out = []
    for perm in itertools.permutations(range(n)):
        level = -1
        ok = True
        for s, p in zip(status, perm):
            if p < level:
                ok = False
                break
            if s == 1:
                level = p
        if ok:
            out.append(perm)
    return out


def feasible_count(status):
    """Closed-form |P|: product over censored positions i of (n - i)."""
    n = len(status)
    count = 1
    for i, s in enumerate(status):
        if s == 0:
            count *= n - i
    return count


def dense_sup(a, b, tau, grid_points=20001, eps=1e-9):
    """Approximate sup |a - b| on [0, tau] by brute force.

    Evaluates on a dense uniform grid plus both curves' change points and
    near-left-limit probes just before each change point.
    """
    ts = [np.linspace(0.0, tau, grid_points)]
    for curve in (a, b):
        cp = np.asarray(curve.change_points(), dtype=float)
        cp = cp[(cp > 0) & (cp <= tau)]
        ts.append(cp)
        ts.append(np.clip(cp - eps, 0.0, tau))
    ts = np.unique(np.concatenate(ts))
    return float(np.max(np.abs(np.asarray(a(ts)) - np.asarray(b(ts)))))


def brownian_sup_tail_dual(x, terms=200):
    """P(sup |W| >= x) via the reflection/Poisson-summation expansion.

    1 - sum_{k in Z} (-1)^k [Phi((2k+1)x) - Phi((2k-1)x)], an independent
    route to the same tail probability as the theta series.
    """
    inside = 0.0
    for k in range(-terms, terms + 1):
        inside += (-1) ** k * (norm.cdf((2 * k + 1) * x) - norm.cdf((2 * k - 1) * x))
    return 1.0 - inside


def km_by_hand(times, status):
    """Product-limit values at distinct failure times, naive loop."""
    times = np.asarray(times, dtype=float)
    status = np.asarray(status)
    event_times = np.unique(times[status == 1])
    vals = []
    s = 1.0
    for t in event_times:
        at_risk = int(np.sum(times >= t))
        deaths = int(np.sum((times == t) & (status == 1)))
        s *= 1.0 - deaths / at_risk
        vals.append(s)
    return event_times, np.asarray(vals)


def random_censored_dataset(rng, n, censor_prob=0.5, ensure_failure=True):
    """Random strictly-positive dataset with distinct times."""
    times = rng.exponential(10.0, n) + 1e-6
    while np.unique(times).size < n:
        times = rng.exponential(10.0, n) + 1e-6
    status = (rng.random(n) > censor_prob).astype(np.int8)
    if ensure_failure and status.sum() == 0:
        status[int(rng.integers(n))] = 1
    return times, status


def chi2_sf_1df(x):
    """Upper tail of chi-squared with one degree of freedom via erfc."""
    return math.erfc(math.sqrt(x / 2.0))
