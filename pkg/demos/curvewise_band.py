"""A simultaneous confidence band for the whole survival curve.

The band is a sup-norm ball: its center is the pointwise median of the
continuous representatives and its radius is the level-quantile of each
draw's sup distance from that center. Coverage is therefore curvewise,
the entire true curve lies inside with the nominal probability, which
is a stronger guarantee than pointwise intervals.

Run:  python demos/curvewise_band.py
"""

import numpy as np

from fidsurv import (
    SurvivalDataset,
    curvewise_band,
    pointwise_ci,
    sample_ensemble,
    sort_and_validate,
)

rng = np.random.default_rng(23)
n = 120

# Weibull failures with exponential censoring, roughly 45% censored.
x = 20.0 * rng.weibull(3.0, n)
z = rng.exponential(25.0, n)
data = sort_and_validate(
    SurvivalDataset(times=np.minimum(x, z), status=(x <= z).astype(np.int8))
)
print(f"n = {n}, censored fraction = {1 - data.status.mean():.2f}")

ensemble = sample_ensemble(data, m=3000, seed=23)
band = curvewise_band(ensemble, level=0.95)
print(f"95% band radius = {band.radius:.4f} (sup-norm around the median curve)\n")

print("  t   |  band lower  center  band upper")
for t in np.linspace(2.0, 24.0, 12):
    print(f" {t:5.1f} |    {band.lower(t):.3f}    {band.center(t):.3f}     {band.upper(t):.3f}")

# Sanity: a simultaneous band at level 0.95 must contain each pointwise
# interval at a suitably reduced level.
t_checks = np.linspace(2.0, 20.0, 10)
contained = True
for t in t_checks:
    lo, hi = pointwise_ci(ensemble, t, 0.89)
    contained &= band.lower(t) <= lo + 1e-12 and hi - 1e-12 <= band.upper(t)
print(f"\nband (95%, curvewise) contains all pointwise 89% intervals: {contained}")

# Bands serialize for plotting elsewhere.
rows = band.grid_rows()
print(f"\nband.grid_rows() -> {len(rows)} (t, lower, center, upper) rows")
print("band.to_json() ->", band.to_json()[:100], "...")
