"""Two-sample comparison: fiducial sup-norm test versus the log-rank family.

The scenario has crossing survival curves: group A fails on a steady
exponential clock, group B holds up better early but then fails on a
sharp Weibull schedule, so the curves cross near t = 1.4. Early and
late differences pull a plain log-rank statistic in opposite directions
and mostly cancel; tests that look at where the curves actually differ
(the fiducial sup-norm test, the supremum forms, early-event weighting)
keep the signal.

Run:  python demos/two_sample_and_logrank.py
"""

import numpy as np

from fidsurv import (
    SurvivalDataset,
    run_all_variants,
    sample_ensemble,
    sort_and_validate,
    two_sample_test,
)
from fidsurv.curves import EvaluationWindow

rng = np.random.default_rng(5)
n = 150


def make(times, censor):
    keep = np.minimum(times, censor)
    return sort_and_validate(
        SurvivalDataset(times=keep, status=(times <= censor).astype(np.int8))
    )


group_a = make(rng.exponential(1.0, n), rng.exponential(3.0, n))      # Exp(1)
group_b = make(1.2 * rng.weibull(2.0, n), rng.exponential(3.0, n))    # late sharp drop

print(f"group A: n={group_a.n}, failures={group_a.n_failures}")
print(f"group B: n={group_b.n}, failures={group_b.n_failures}")

# Where the curves sit on each side of the crossing (true values).
for t in (0.5, 2.5):
    sa, sb = np.exp(-t), np.exp(-((t / 1.2) ** 2))
    print(f"  true S_A({t}) = {sa:.2f}   true S_B({t}) = {sb:.2f}")
print()

# Fiducial test: sample one ensemble per group with distinct seeds,
# pair the draws, and compare sup distances from the median difference.
ens_a = sample_ensemble(group_a, m=2000, seed=51)
ens_b = sample_ensemble(group_b, m=2000, seed=52)
window = EvaluationWindow.for_two_samples(group_a, group_b)
report = two_sample_test(ens_a, ens_b, window=window)
print(f"fiducial two-sample test: statistic={report.statistic:.4f} "
      f"p={report.p_value:.4f}  ({report.count}/{report.m} draws as extreme)\n")

# All twelve comparator variants on the same data.
print("comparator          chi-square/sup    p-value")
for name, res in run_all_variants(group_a, group_b).items():
    print(f"  {name:6s} ({res.form:9s})   {res.statistic:8.4f}    {res.p_value:8.4f}")

print("\nThe early surplus and late deficit of group B cancel inside the")
print("flat-weighted sum, so plain LR (and late-weighted FH) miss the")
print("difference entirely; the sup forms, the early-weighted variants,")
print("and the whole-curve fiducial test all detect it.")
