"""Desk-scale Monte Carlo studies with the built-in experiment runner.

Four experiment kinds are available, each fully seeded and
parallelism-invariant:

  ci     interval calibration (miss rates and widths per time point)
  mse    point-estimate mean squared error against KM tail variants
  power  rejection rates for the fiducial test and 12 log-rank variants
  band   curvewise band coverage

This script runs small versions of each. The same studies run from the
command line, e.g.  fidsurv simulate study.toml --out results/
with the scenario spelled out in TOML; see README for the format.

Run:  python demos/simulation_study.py   (about a minute)
"""

import numpy as np

from fidsurv.simlab import (
    PRESETS,
    ScenarioSpec,
    Exponential,
    Uniform,
    TwoSampleScenario,
    run_band_experiment,
    run_ci_experiment,
    run_mse_experiment,
    run_power_experiment,
)

# ----------------------------------------------------------------- ci
spec = PRESETS["exp10-u5-n30"]
res = run_ci_experiment(spec, times=(1.0, 2.0, 3.0), reps=300, m=500, seed=1)
print(f"[ci] Exp(10) failures, U(0,5) censoring, n=30, "
      f"reps={res.reps} ({res.runtime_seconds:.1f}s)")
print("      t   flavor          miss-low%  miss-high%  mean width")
for i, flavor in enumerate(res.flavors):
    for j, t in enumerate(res.times):
        print(f"    {t:4.1f}  {flavor:14s}   {res.lower_miss_pct[i][j]:5.1f}      "
              f"{res.upper_miss_pct[i][j]:5.1f}      {res.mean_width[i][j]:.3f}")

# ---------------------------------------------------------------- mse
# The KM tail conventions (drop/hold/halve past the last observation)
# only separate at deep survival levels; S=0.1 shows the split.
spec = ScenarioSpec(Exponential(1.0), Uniform(0.0, 5.0), n=25)
res = run_mse_experiment(spec, survival_levels=(0.75, 0.5, 0.25, 0.1), reps=400, m=800, seed=2)
print(f"\n[mse] reps={res.reps}, eval times solve S(t)=level exactly")
print("      estimator   " + "".join(f"S={lv:<6}" for lv in res.survival_levels))
for i, est in enumerate(res.estimators):
    cells = "".join(f"{res.mse[i][j] * 1e3:6.2f}  " for j in range(len(res.survival_levels)))
    print(f"      {est:10s}  {cells}   (x 1e-3)")

# -------------------------------------------------------------- power
pair = TwoSampleScenario(
    ScenarioSpec(Exponential(1.0), Uniform(0.0, 4.0), n=60),
    ScenarioSpec(Exponential(2.0), Uniform(0.0, 4.0), n=60),
)
res = run_power_experiment(pair, reps=120, m=400, seed=3)
print(f"\n[power] alpha={res.alpha}, reps={res.reps}")
order = np.argsort(res.rejection_pct)[::-1]
for k in order:
    print(f"      {res.tests[k]:9s} rejects {res.rejection_pct[k]:5.1f}%")

# --------------------------------------------------------------- band
spec = ScenarioSpec(Exponential(5.0), Uniform(0.0, 15.0), n=80)
res = run_band_experiment(spec, reps=150, m=500, level=0.95, seed=4)
print(f"\n[band] 95% curvewise coverage over {res.reps} reps: {res.coverage_pct:.1f}%")
