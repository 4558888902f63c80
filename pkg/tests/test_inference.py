"""Pointwise intervals, quantile intervals, curvewise bands, and tests."""

import json

import numpy as np
import pytest

from fidsurv import (
    AllNonIdentifiable,
    ConfidenceBand,
    EvaluationWindow,
    FiducialEnsemble,
    MismatchedM,
    NonIdentifiable,
    SmoothCurve,
    StepCurve,
    SurvivalDataset,
    curvewise_band,
    invert_curve,
    one_sample_test,
    pointwise_ci,
    pointwise_quantile,
    quantile_ci,
    sample_ensemble,
    sort_and_validate,
    sup_distance,
    two_sample_test,
)
from tests._oracles import random_censored_dataset


def make_ensemble(seed, n=20, m=400, censor_prob=0.4):
    rng = np.random.default_rng(seed)
    times, status = random_censored_dataset(rng, n, censor_prob)
    sd = sort_and_validate(
        SurvivalDataset(times=times, status=np.asarray(status, dtype=np.int8))
    )
    return sample_ensemble(sd, m, seed=seed)


def toy_ensemble(interp_log, tail_slopes, anchor_times=(0.0, 1.0)):
    """Hand-built ensemble exposing only the continuous representatives."""
    interp_log = np.asarray(interp_log, dtype=float)
    m = interp_log.shape[0]
    sd = sort_and_validate(
        SurvivalDataset(times=np.array([1.0]), status=np.array([1], dtype=np.int8))
    )
    return FiducialEnsemble(
        data=sd,
        m=m,
        seed_entropy=None,
        permutations=np.zeros((m, 1), dtype=np.intp),
        assigned=1.0 - np.exp(interp_log[:, -1:]),
        lower_env=np.hstack([np.zeros((m, 1)), 1.0 - np.exp(interp_log[:, -1:])]),
        upper_env=np.ones((m, 2)),
        interp_times=np.asarray(anchor_times, dtype=float),
        interp_log=interp_log,
        tail_slopes=np.asarray(tail_slopes, dtype=float),
    )


class TestPointwiseCI:
    def setup_method(self):
        self.ens = make_ensemble(51)

    def test_interpolation_matches_sorted_quantiles(self):
        t = float(np.median(self.ens.data.times))
        lo, hi = pointwise_ci(self.ens, t, 0.95)
        vals = np.sort(self.ens.eval_interp([t])[:, 0])
        m = self.ens.m
        assert lo == vals[int(np.ceil(m * 0.025)) - 1]
        assert hi == vals[int(np.ceil(m * 0.975)) - 1]

    def test_conservative_contains_interpolation(self):
        for t in np.linspace(0.1, float(self.ens.data.times[-1]), 25):
            a = pointwise_ci(self.ens, float(t), 0.95, "interpolation")
            b = pointwise_ci(self.ens, float(t), 0.95, "conservative")
            assert b[0] <= a[0] + 1e-12
            assert a[1] <= b[1] + 1e-12

    def test_level_ordering(self):
        t = float(self.ens.data.event_times[0])
        narrow = pointwise_ci(self.ens, t, 0.5)
        wide = pointwise_ci(self.ens, t, 0.99)
        assert wide[0] <= narrow[0] <= narrow[1] <= wide[1]

    def test_rejects_bad_flavor_and_level(self):
        with pytest.raises(ValueError):
            pointwise_ci(self.ens, 1.0, 0.95, "nope")
        with pytest.raises(ValueError):
            pointwise_ci(self.ens, 1.0, 0.0)


class TestQuantileCI:
    def test_matches_per_draw_inversion(self):
        ens = make_ensemble(52, n=15, m=120)
        for q in (0.7, 0.5, 0.3):
            crossings = []
            for j in range(ens.m):
                try:
                    crossings.append(invert_curve(ens.interp_curve(j), q))
                except NonIdentifiable:
                    crossings.append(np.inf)
            crossings = np.asarray(crossings)
            lo, hi = quantile_ci(ens, q, 0.9)
            assert np.isclose(lo, pointwise_quantile(crossings, 0.05))
            finite_hi = pointwise_quantile(crossings, 0.95)
            if np.isfinite(finite_hi):
                assert np.isclose(hi, finite_hi)
            else:
                assert np.isinf(hi)

    def test_lower_survival_crossed_later(self):
        ens = make_ensemble(53, n=25, m=300, censor_prob=0.2)
        lo_big, _ = quantile_ci(ens, 0.7, 0.9)
        lo_small, _ = quantile_ci(ens, 0.3, 0.9)
        assert lo_small >= lo_big

    def test_open_ended_upper(self):
        # one draw crosses 0.5, the other never does (flat tail)
        ens = toy_ensemble(
            interp_log=[[0.0, np.log(0.9)], [0.0, np.log(0.95)]],
            tail_slopes=[-1.0, 0.0],
        )
        lo, hi = quantile_ci(ens, 0.5, 0.9)
        assert np.isfinite(lo)
        assert np.isinf(hi)

    def test_all_draws_flat(self):
        ens = toy_ensemble(
            interp_log=[[0.0, np.log(0.9)], [0.0, np.log(0.8)]],
            tail_slopes=[0.0, 0.0],
        )
        with pytest.raises(AllNonIdentifiable):
            quantile_ci(ens, 0.5, 0.9)

    def test_rejects_bad_q(self):
        ens = make_ensemble(54, n=8, m=20)
        with pytest.raises(ValueError):
            quantile_ci(ens, 1.5, 0.9)


class TestCurvewiseBand:
    def setup_method(self):
        self.ens = make_ensemble(55, n=25, m=500)
        self.band = curvewise_band(self.ens, 0.95)

    def test_radius_matches_per_draw_sup_distance(self):
        ens = make_ensemble(56, n=12, m=60)
        band = curvewise_band(ens, 0.9)
        norms = np.array(
            [
                sup_distance(ens.interp_curve(j), band.center, band.window)
                for j in range(ens.m)
            ]
        )
        assert np.isclose(band.radius, pointwise_quantile(norms, 0.9), rtol=1e-10)

    def test_band_well_formed(self):
        ts = self.band.window.grid
        assert np.all(self.band.lower(ts) <= self.band.upper(ts))
        assert np.all(self.band.lower(ts) >= 0.0)
        assert np.all(self.band.upper(ts) <= 1.0)

    def test_radius_monotone_in_level(self):
        assert curvewise_band(self.ens, 0.5).radius <= self.band.radius

    def test_contains_covered_draws(self):
        # exactly ceil(0.95 m) draws lie within the radius
        values = self.ens.eval_interp(self.band.window.grid)
        med = np.asarray(self.band.center(self.band.window.grid))
        inside = np.abs(values - med[None, :]).max(axis=1) <= self.band.radius + 1e-12
        assert inside.sum() >= int(np.ceil(0.95 * self.ens.m))

    def test_band_contains_reduced_level_pointwise_ci(self):
        ens = make_ensemble(57, n=30, m=1000)
        band = curvewise_band(ens, 0.95)
        for t in band.window.grid[1:]:
            lo, hi = pointwise_ci(ens, float(t), 0.89)
            assert band.lower(t) <= lo + 1e-12
            assert hi <= band.upper(t) + 1e-12

    def test_grid_rows_and_json(self):
        rows = list(self.band.grid_rows())
        assert len(rows) == self.band.window.grid.size
        t, lo, mid, hi = rows[3]
        assert lo <= mid <= hi
        blob = json.loads(self.band.to_json())
        assert blob["level"] == 0.95
        assert blob["radius"] == self.band.radius

    def test_rejects_tiny_ensemble(self):
        ens = toy_ensemble(interp_log=[[0.0, -0.1]], tail_slopes=[-0.5])
        with pytest.raises(ValueError):
            curvewise_band(ens, 0.95)

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            ConfidenceBand(
                center=StepCurve(knots=[1.0], values=[0.5]),
                radius=-0.1,
                level=0.9,
                window=EvaluationWindow(tau=2.0, grid=np.array([0.0])),
            )


class TestOneSampleTest:
    def setup_method(self):
        self.ens = make_ensemble(58, n=40, m=500, censor_prob=0.3)
        self.window = self.ens.window()

    def test_center_gives_p_one(self):
        values = self.ens.eval_interp(self.window.grid)
        from fidsurv import pointwise_median_curve

        center = pointwise_median_curve(values, self.window)
        report = one_sample_test(self.ens, center)
        assert report.statistic == 0.0
        assert report.p_value == 1.0
        assert report.count == self.ens.m

    def test_distant_null_rejected(self):
        ones = SmoothCurve(lambda t: np.ones_like(np.asarray(t, dtype=float)))
        report = one_sample_test(self.ens, ones)
        assert report.p_value < 0.01

    def test_true_null_not_rejected(self):
        # status flips are independent of the times, so the event hazard is
        # the failure fraction (0.7) times the Exp(10) hazard of the times
        truth = SmoothCurve(lambda t: np.exp(-0.07 * np.asarray(t, dtype=float)))
        report = one_sample_test(self.ens, truth)
        assert report.p_value > 0.01

    def test_sided_conventions(self):
        # a null curve far above the data: only the "lower" side rejects
        above = SmoothCurve(lambda t: np.ones_like(np.asarray(t, dtype=float)))
        p_lower = one_sample_test(self.ens, above, sided="lower").p_value
        p_upper = one_sample_test(self.ens, above, sided="upper").p_value
        assert p_lower < 0.01
        assert p_upper > 0.5
        # and a null curve far below: only the "upper" side rejects
        below = SmoothCurve(lambda t: np.full_like(np.asarray(t, dtype=float), 1e-4))
        p_lower = one_sample_test(self.ens, below, sided="lower").p_value
        p_upper = one_sample_test(self.ens, below, sided="upper").p_value
        assert p_upper < 0.01
        assert p_lower > 0.5

    def test_p_value_is_exact_count(self):
        truth = SmoothCurve(lambda t: np.exp(-0.07 * np.asarray(t, dtype=float)))
        report = one_sample_test(self.ens, truth)
        assert report.p_value == report.count / report.m
        assert report.m == self.ens.m

    def test_resolution_floor_flag(self):
        ones = SmoothCurve(lambda t: np.ones_like(np.asarray(t, dtype=float)))
        report = one_sample_test(self.ens, ones)
        assert report.at_resolution_floor == (report.count == 0)

    def test_rejects_bad_side(self):
        with pytest.raises(ValueError):
            one_sample_test(self.ens, SmoothCurve(lambda t: t * 0.0 + 0.5), sided="both")


class TestTwoSampleTest:
    @staticmethod
    def exponential_pair(seed, mean_a, mean_b, n=40, m=300):
        rng = np.random.default_rng(seed)

        def build(mean, sub_seed):
            x = rng.exponential(mean, n)
            z = rng.exponential(mean * 2, n)
            sd = sort_and_validate(
                SurvivalDataset(
                    times=np.minimum(x, z), status=(x <= z).astype(np.int8)
                )
            )
            return sample_ensemble(sd, m, seed=sub_seed)

        return build(mean_a, seed * 2 + 1), build(mean_b, seed * 2 + 2)

    def test_same_law_large_p(self):
        ens_a, ens_b = self.exponential_pair(61, 10.0, 10.0)
        report = two_sample_test(ens_a, ens_b)
        assert report.p_value > 0.2

    def test_different_laws_rejected(self):
        ens_a, ens_b = self.exponential_pair(62, 20.0, 1.0)
        report = two_sample_test(ens_a, ens_b)
        assert report.p_value < 0.01

    def test_delta0_constant_equals_none(self):
        ens_a, ens_b = self.exponential_pair(63, 5.0, 5.0)
        base = two_sample_test(ens_a, ens_b)
        zero = two_sample_test(ens_a, ens_b, delta0=0.0)
        func = two_sample_test(ens_a, ens_b, delta0=lambda t: np.zeros_like(t))
        assert base.statistic == zero.statistic == func.statistic
        assert base.count == zero.count == func.count

    def test_true_delta0_restores_null(self):
        ens_a, ens_b = self.exponential_pair(64, 12.0, 3.0)
        rejected = two_sample_test(ens_a, ens_b)
        assert rejected.p_value < 0.05

        def true_gap(t):
            t = np.asarray(t, dtype=float)
            return np.exp(-t / 12.0) - np.exp(-t / 3.0)

        report = two_sample_test(ens_a, ens_b, delta0=true_gap)
        assert report.p_value > 0.05

    def test_mismatched_m(self):
        ens_a, _ = self.exponential_pair(65, 5.0, 5.0, m=100)
        _, ens_b = self.exponential_pair(66, 5.0, 5.0, m=101)
        with pytest.raises(MismatchedM):
            two_sample_test(ens_a, ens_b)

    def test_report_round_trip(self):
        ens_a, ens_b = self.exponential_pair(67, 5.0, 5.0, n=20, m=80)
        report = two_sample_test(ens_a, ens_b)
        blob = json.loads(report.to_json())
        assert blob["m"] == 80
        assert blob["p_value"] == report.p_value
        assert blob["null"] == "S_A - S_B = delta0"
