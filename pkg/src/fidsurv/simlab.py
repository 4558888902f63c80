"""Scenario distributions and Monte Carlo experiment runners.

Each experiment draws independent replications of a censored-data
scenario, applies the estimators and tests, and aggregates error rates,
mean squared errors, rejection percentages, or band coverage. Every
replication derives its random stream from (master seed, replication
index), and aggregation walks replications in index order, so results
are identical for any worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc, ndtri

from .curves import SmoothCurve, pointwise_median, sup_distance
from .dataset import SurvivalDataset, sort_and_validate
from .errors import NoFailures
from .estimators import TAIL_CONVENTIONS, kaplan_meier
from .inference import curvewise_band, pointwise_ci, two_sample_test
from .logrank import VARIANT_NAMES, run_all_variants
from .sampler import sample_ensemble

__all__ = [
    "Exponential",
    "Weibull",
    "Uniform",
    "HalfNormal",
    "ExponentialMixture",
    "ScenarioSpec",
    "TwoSampleScenario",
    "sample_scenario",
    "run_ci_experiment",
    "run_mse_experiment",
    "run_power_experiment",
    "run_band_experiment",
    "CIExperimentResult",
    "MSEExperimentResult",
    "PowerExperimentResult",
    "BandExperimentResult",
    "PRESETS",
    "parse_distribution",
    "parse_scenario",
]


# ---------------------------------------------------------------------------
# scenario distributions


@dataclass(frozen=True)
class Exponential:
    """Exponential lifetime parameterized by its MEAN."""

    mean: float

    def __post_init__(self):
        if self.mean <= 0:
            raise ValueError("mean must be positive")

    def draw(self, rng, size):
        return rng.exponential(self.mean, size)

    def survival(self, t):
        return np.exp(-np.asarray(t, dtype=float) / self.mean)

    def time_at_survival(self, p):
        return -self.mean * np.log(p)

    def describe(self):
        return {"dist": "exponential", "mean": self.mean}


@dataclass(frozen=True)
class Weibull:
    """Weibull lifetime with explicit shape and scale."""

    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0 or self.scale <= 0:
            raise ValueError("shape and scale must be positive")

    def draw(self, rng, size):
        return self.scale * rng.weibull(self.shape, size)

    def survival(self, t):
        return np.exp(-((np.asarray(t, dtype=float) / self.scale) ** self.shape))

    def time_at_survival(self, p):
        return self.scale * (-np.log(p)) ** (1.0 / self.shape)

    def describe(self):
        return {"dist": "weibull", "shape": self.shape, "scale": self.scale}


@dataclass(frozen=True)
class Uniform:
    """Uniform lifetime on [low, high]."""

    low: float
    high: float

    def __post_init__(self):
        if not 0 <= self.low < self.high:
            raise ValueError("need 0 <= low < high")

    def draw(self, rng, size):
        return rng.uniform(self.low, self.high, size)

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        return np.clip((self.high - t) / (self.high - self.low), 0.0, 1.0)

    def time_at_survival(self, p):
        return self.high - p * (self.high - self.low)

    def describe(self):
        return {"dist": "uniform", "low": self.low, "high": self.high}


@dataclass(frozen=True)
class HalfNormal:
    """Absolute value of a centered normal with standard deviation sigma."""

    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def draw(self, rng, size):
        return np.abs(rng.normal(0.0, self.sigma, size))

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        return erfc(t / (self.sigma * np.sqrt(2.0)))

    def time_at_survival(self, p):
        return self.sigma * ndtri(1.0 - 0.5 * p)

    def describe(self):
        return {"dist": "halfnormal", "sigma": self.sigma}


@dataclass(frozen=True)
class ExponentialMixture:
    """Mixture of exponentials, components parameterized by their means."""

    means: tuple
    weights: tuple

    def __post_init__(self):
        means = tuple(float(v) for v in self.means)
        weights = tuple(float(v) for v in self.weights)
        if len(means) != len(weights) or not means:
            raise ValueError("means and weights must align and be nonempty")
        if any(v <= 0 for v in means) or any(v <= 0 for v in weights):
            raise ValueError("means and weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "weights", weights)

    def draw(self, rng, size):
        edges = np.cumsum(self.weights)
        comp = np.searchsorted(edges, rng.random(size))
        comp = np.minimum(comp, len(self.means) - 1)
        return rng.exponential(1.0, size) * np.asarray(self.means)[comp]

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t, dtype=float)
        for w, mu in zip(self.weights, self.means):
            out = out + w * np.exp(-t / mu)
        return out

    def time_at_survival(self, p):
        hi = max(self.means) * (-np.log(p)) + 1.0
        return brentq(lambda t: float(self.survival(t)) - p, 0.0, hi)

    def describe(self):
        return {"dist": "expmixture", "means": list(self.means), "weights": list(self.weights)}


# ---------------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class ScenarioSpec:
    """One-group censored-data scenario: failure and censoring laws plus n."""

    failure: object
    censoring: object | None
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")

    def describe(self):
        return {
            "failure": self.failure.describe(),
            "censoring": None if self.censoring is None else self.censoring.describe(),
            "n": self.n,
        }


@dataclass(frozen=True)
class TwoSampleScenario:
    group_a: ScenarioSpec
    group_b: ScenarioSpec

    def describe(self):
        return {"group_a": self.group_a.describe(), "group_b": self.group_b.describe()}


def sample_scenario(spec: ScenarioSpec, rng) -> SurvivalDataset:
    """Observed times and censoring indicators for one replication."""
    x = spec.failure.draw(rng, spec.n)
    if spec.censoring is None:
        return SurvivalDataset(times=x, status=np.ones(spec.n, dtype=np.int8))
    z = spec.censoring.draw(rng, spec.n)
    return SurvivalDataset(times=np.minimum(x, z), status=(x <= z).astype(np.int8))


PRESETS = {
    # one-sample interval calibration: Exp(mean 10) failures, U(0,5) censoring
    "exp10-u5-n30": ScenarioSpec(Exponential(10.0), Uniform(0.0, 5.0), n=30),
    # heavy-censoring mixture scenario
    "expmix-n34": ScenarioSpec(ExponentialMixture((0.227, 22.44), (0.187, 0.813)), Uniform(2.0, 8.0), n=34),
    # estimator mean-squared-error scenario
    "exp1-u5-n25": ScenarioSpec(Exponential(1.0), Uniform(0.0, 5.0), n=25),
    # two-sample null: same failure law, different censoring
    "null-weibull-n200": TwoSampleScenario(
        ScenarioSpec(Weibull(2.0, 1.0), HalfNormal(1.0), n=200),
        ScenarioSpec(Weibull(2.0, 1.0), Exponential(1.0), n=200),
    ),
    # crossing curves with late separation
    "exp-vs-weibull-n200": TwoSampleScenario(
        ScenarioSpec(Exponential(30.0), Exponential(30.0), n=200),
        ScenarioSpec(Weibull(30.0, 20.0), Exponential(30.0), n=200),
    ),
    # steep Weibull pair, uniform censoring
    "weibull-shapes-n200": TwoSampleScenario(
        ScenarioSpec(Weibull(30.0, 20.0), Uniform(0.0, 80.0), n=200),
        ScenarioSpec(Weibull(20.0, 20.0), Uniform(0.0, 80.0), n=200),
    ),
    # early-crossing light-tail pair
    "crossing-hazards-n200": TwoSampleScenario(
        ScenarioSpec(Exponential(1.0), HalfNormal(1.0), n=200),
        ScenarioSpec(HalfNormal(1.0), Weibull(2.0, 1.0), n=200),
    ),
    # band-coverage scenario: steep Weibull with heavy exponential censoring
    "weibull-band-n300": ScenarioSpec(Weibull(10.0, 20.0), Exponential(20.0), n=300),
}

_DIST_BUILDERS = {
    "exponential": (Exponential, ("mean",)),
    "weibull": (Weibull, ("shape", "scale")),
    "uniform": (Uniform, ("low", "high")),
    "halfnormal": (HalfNormal, ("sigma",)),
    "expmixture": (ExponentialMixture, ("means", "weights")),
}


def parse_distribution(block: dict):
    """Build a distribution from an explicit-key config block.

    Keys are mandatory and positional forms are rejected, because the
    common shorthand notations are ambiguous about rate-vs-mean and
    shape/scale order.
    """
    if "dist" not in block:
        raise ValueError("distribution block needs a 'dist' key")
    kind = str(block["dist"]).lower()
    if kind not in _DIST_BUILDERS:
        raise ValueError(f"unknown distribution {kind!r}; expected one of {sorted(_DIST_BUILDERS)}")
    cls, keys = _DIST_BUILDERS[kind]
    missing = [k for k in keys if k not in block]
    if missing:
        raise ValueError(f"{kind} block missing keys {missing}")
    extra = set(block) - {"dist", *keys}
    if extra:
        raise ValueError(f"{kind} block has unknown keys {sorted(extra)}")
    args = [tuple(block[k]) if isinstance(block[k], (list, tuple)) else float(block[k]) for k in keys]
    return cls(*args)


def parse_scenario(block: dict) -> ScenarioSpec:
    """Build a one-group scenario from {failure: {...}, censoring: {...}, n}."""
    if "failure" not in block or "n" not in block:
        raise ValueError("scenario block needs 'failure' and 'n'")
    censoring = block.get("censoring")
    return ScenarioSpec(
        failure=parse_distribution(block["failure"]),
        censoring=None if censoring is None else parse_distribution(censoring),
        n=int(block["n"]),
    )


# ---------------------------------------------------------------------------
# experiment results


@dataclass(frozen=True)
class _ResultBase:
    reps: int
    m: int
    seed: int
    runtime_seconds: float
    scenario: dict = field(repr=False)


@dataclass(frozen=True)
class CIExperimentResult(_ResultBase):
    """Per (flavor, time): miss rates below/above in percent and mean width."""

    times: tuple
    level: float
    flavors: tuple
    lower_miss_pct: np.ndarray  # (n_flavors, n_times)
    upper_miss_pct: np.ndarray
    mean_width: np.ndarray
    fallback_reps: int  # replications with no failures (conservative fallback)

    def rows(self):
        """CSV rows: flavor, t, lower_miss_pct, upper_miss_pct, mean_width."""
        for i, flavor in enumerate(self.flavors):
            for j, t in enumerate(self.times):
                yield (
                    flavor,
                    t,
                    float(self.lower_miss_pct[i, j]),
                    float(self.upper_miss_pct[i, j]),
                    float(self.mean_width[i, j]),
                )


@dataclass(frozen=True)
class MSEExperimentResult(_ResultBase):
    """Mean squared error of each estimator at the requested survival levels."""

    survival_levels: tuple
    eval_times: tuple
    estimators: tuple  # ("fiducial", "kml", "kmm", "kmh")
    mse: np.ndarray  # (n_estimators, n_levels)

    def rows(self):
        for i, name in enumerate(self.estimators):
            for j, level in enumerate(self.survival_levels):
                yield (name, level, float(self.eval_times[j]), float(self.mse[i, j]))


@dataclass(frozen=True)
class PowerExperimentResult(_ResultBase):
    """Rejection percentage at level alpha for each test."""

    alpha: float
    tests: tuple  # ("fiducial", "LR", ..., "SFH")
    rejection_pct: np.ndarray

    def rows(self):
        for name, pct in zip(self.tests, self.rejection_pct):
            yield (name, float(pct))

    def as_dict(self):
        return {name: float(pct) for name, pct in zip(self.tests, self.rejection_pct)}


@dataclass(frozen=True)
class BandExperimentResult(_ResultBase):
    """Curvewise band coverage of the true survival curve, in percent."""

    level: float
    coverage_pct: float

    def rows(self):
        yield (self.level, self.coverage_pct)


# ---------------------------------------------------------------------------
# replication plumbing


def _rep_children(seed: int, rep: int, k: int):
    return np.random.SeedSequence((int(seed), int(rep))).spawn(k)


def _run_indexed(fn, reps: int, workers: int):
    """Evaluate fn over range(reps), returning results in index order."""
    if workers <= 1:
        return [fn(rep) for rep in range(reps)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, reps // (workers * 8))
        return list(pool.map(fn, range(reps), chunksize=chunk))


@dataclass(frozen=True)
class _CILoop:
    spec: ScenarioSpec
    times: tuple
    m: int
    level: float
    seed: int

    def __call__(self, rep: int):
        data_seq, ens_seq = _rep_children(self.seed, rep, 2)
        rng = np.random.Generator(np.random.PCG64(data_seq))
        data = sample_scenario(self.spec, rng)
        sd = sort_and_validate(data)
        ensemble = sample_ensemble(sd, self.m, ens_seq, validate=False)
        truth = np.asarray(self.spec.failure.survival(np.asarray(self.times)))
        fallback = not ensemble.has_interpolation

        out = np.empty((2, len(self.times), 3))
        for i, flavor in enumerate(("interpolation", "conservative")):
            used = "conservative" if fallback else flavor
            for j, t in enumerate(self.times):
                lo, hi = pointwise_ci(ensemble, float(t), self.level, used)
                out[i, j] = (truth[j] < lo, truth[j] > hi, hi - lo)
        return out, fallback


def run_ci_experiment(
    spec: ScenarioSpec,
    times,
    reps: int,
    m: int,
    level: float = 0.95,
    seed: int = 0,
    workers: int = 1,
) -> CIExperimentResult:
    """Pointwise-interval calibration study.

    For each replication and evaluation time, record whether the truth
    fell below/above the interval and the interval width, for both the
    interpolation and conservative flavors. Replications with no
    observed failures fall back to the conservative interval.
    """
    start = time.monotonic()
    times = tuple(float(t) for t in times)
    loop = _CILoop(spec=spec, times=times, m=int(m), level=float(level), seed=int(seed))
    rows = _run_indexed(loop, int(reps), workers)
    stacked = np.stack([r[0] for r in rows])  # (reps, 2, T, 3)
    agg = stacked.mean(axis=0)
    return CIExperimentResult(
        reps=int(reps),
        m=int(m),
        seed=int(seed),
        runtime_seconds=time.monotonic() - start,
        scenario=spec.describe(),
        times=times,
        level=float(level),
        flavors=("interpolation", "conservative"),
        lower_miss_pct=100.0 * agg[:, :, 0],
        upper_miss_pct=100.0 * agg[:, :, 1],
        mean_width=agg[:, :, 2],
        fallback_reps=sum(r[1] for r in rows),
    )


@dataclass(frozen=True)
class _MSELoop:
    spec: ScenarioSpec
    eval_times: tuple
    m: int
    seed: int

    def __call__(self, rep: int):
        data_seq, ens_seq = _rep_children(self.seed, rep, 2)
        rng = np.random.Generator(np.random.PCG64(data_seq))
        data = sample_scenario(self.spec, rng)
        sd = sort_and_validate(data)
        ts = np.asarray(self.eval_times)

        ests = np.empty((4, ts.size))
        try:
            ensemble = sample_ensemble(sd, self.m, ens_seq, validate=False)
            ests[0] = pointwise_median(ensemble.eval_interp(ts))
        except NoFailures:
            # nothing observed failing: the fiducial median stays at 1
            ests[0] = 1.0
        for i, tail in enumerate(TAIL_CONVENTIONS):
            ests[1 + i] = kaplan_meier(sd, tail=tail)(ts)
        return ests


def run_mse_experiment(
    spec: ScenarioSpec,
    survival_levels,
    reps: int,
    m: int,
    seed: int = 0,
    workers: int = 1,
) -> MSEExperimentResult:
    """Mean squared error of the fiducial median vs the product-limit tails.

    Evaluation times are where the true survival equals each requested
    level, so the squared error at level p is (estimate - p)^2.
    """
    start = time.monotonic()
    levels = tuple(float(p) for p in survival_levels)
    eval_times = tuple(float(spec.failure.time_at_survival(p)) for p in levels)
    loop = _MSELoop(spec=spec, eval_times=eval_times, m=int(m), seed=int(seed))
    rows = _run_indexed(loop, int(reps), workers)
    stacked = np.stack(rows)  # (reps, 4, L)
    truth = np.asarray(levels)
    mse = ((stacked - truth[None, None, :]) ** 2).mean(axis=0)
    return MSEExperimentResult(
        reps=int(reps),
        m=int(m),
        seed=int(seed),
        runtime_seconds=time.monotonic() - start,
        scenario=spec.describe(),
        survival_levels=levels,
        eval_times=eval_times,
        estimators=("fiducial", *TAIL_CONVENTIONS),
        mse=mse,
    )


@dataclass(frozen=True)
class _PowerLoop:
    scenario: TwoSampleScenario
    m: int
    seed: int
    fh: tuple

    def __call__(self, rep: int):
        data_seq, seq_a, seq_b = _rep_children(self.seed, rep, 3)
        rng = np.random.Generator(np.random.PCG64(data_seq))
        sd_a = sort_and_validate(sample_scenario(self.scenario.group_a, rng))
        sd_b = sort_and_validate(sample_scenario(self.scenario.group_b, rng))

        ens_a = sample_ensemble(sd_a, self.m, seq_a, validate=False)
        ens_b = sample_ensemble(sd_b, self.m, seq_b, validate=False)
        pvals = np.empty(1 + len(VARIANT_NAMES))
        pvals[0] = two_sample_test(ens_a, ens_b).p_value
        results = run_all_variants(sd_a, sd_b, fh=self.fh)
        for i, name in enumerate(VARIANT_NAMES):
            pvals[1 + i] = results[name].p_value
        return pvals


def run_power_experiment(
    scenario: TwoSampleScenario,
    reps: int,
    m: int,
    alpha: float = 0.05,
    seed: int = 0,
    workers: int = 1,
    fh=(1.0, 1.0),
) -> PowerExperimentResult:
    """Rejection percentages of the fiducial two-sample test and comparators."""
    start = time.monotonic()
    loop = _PowerLoop(scenario=scenario, m=int(m), seed=int(seed), fh=tuple(fh))
    rows = _run_indexed(loop, int(reps), workers)
    pvals = np.stack(rows)  # (reps, 13)
    return PowerExperimentResult(
        reps=int(reps),
        m=int(m),
        seed=int(seed),
        runtime_seconds=time.monotonic() - start,
        scenario=scenario.describe(),
        alpha=float(alpha),
        tests=("fiducial", *VARIANT_NAMES),
        rejection_pct=100.0 * (pvals < float(alpha)).mean(axis=0),
    )


@dataclass(frozen=True)
class _BandLoop:
    spec: ScenarioSpec
    m: int
    level: float
    seed: int

    def __call__(self, rep: int):
        data_seq, ens_seq = _rep_children(self.seed, rep, 2)
        rng = np.random.Generator(np.random.PCG64(data_seq))
        sd = sort_and_validate(sample_scenario(self.spec, rng))
        ensemble = sample_ensemble(sd, self.m, ens_seq, validate=False)
        band = curvewise_band(ensemble, self.level)
        truth = SmoothCurve(self.spec.failure.survival)
        gap = sup_distance(truth, band.center, band.window)
        return float(gap <= band.radius)


def run_band_experiment(
    spec: ScenarioSpec,
    reps: int,
    m: int,
    level: float = 0.95,
    seed: int = 0,
    workers: int = 1,
) -> BandExperimentResult:
    """Curvewise-band coverage of the true survival curve."""
    start = time.monotonic()
    loop = _BandLoop(spec=spec, m=int(m), level=float(level), seed=int(seed))
    covered = _run_indexed(loop, int(reps), workers)
    return BandExperimentResult(
        reps=int(reps),
        m=int(m),
        seed=int(seed),
        runtime_seconds=time.monotonic() - start,
        scenario=spec.describe(),
        level=float(level),
        coverage_pct=100.0 * float(np.mean(covered)),
    )
