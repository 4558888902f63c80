"""Fiducial sampler: reachable assignments, envelopes, representatives."""

import numpy as np
import pytest
from scipy.stats import ks_2samp

from fidsurv import (
    NoFailures,
    RngStream,
    SurvivalDataset,
    beta_product_batch,
    beta_product_draw,
    draw_bounds,
    expected_lower_bound,
    expected_upper_bound,
    log_linear_curve,
    sample_ensemble,
    sample_permutation,
    sort_and_validate,
)
from tests._oracles import feasible_assignments, feasible_count


def dataset_for(status, times=None):
    status = np.asarray(status, dtype=np.int8)
    if times is None:
        times = np.arange(1, status.size + 1, dtype=float)
    return sort_and_validate(
        SurvivalDataset(times=np.asarray(times, dtype=float), status=status)
    )


def random_dataset(rng, n, censor_prob=0.5):
    times = np.sort(rng.exponential(10.0, n)) + 1e-6
    status = (rng.random(n) >= censor_prob).astype(np.int8)
    if status.sum() == 0:
        status[rng.integers(n)] = 1
    return dataset_for(status, times)


class TestReachableAssignments:
    PATTERNS = [
        (1, 0),
        (0, 1),
        (1, 0, 1),
        (0, 1, 1),
        (1, 0, 0),
        (0, 0, 1),
        (1, 1, 0, 1),
        (0, 1, 0, 1),
        (1, 0, 1, 0),
    ]

    @pytest.mark.parametrize("status", PATTERNS)
    def test_sampled_set_equals_constraint_set(self, status):
        expected = set(feasible_assignments(status))
        assert len(expected) == feasible_count(status)
        ens = sample_ensemble(dataset_for(status), 3000, seed=42)
        got = set(map(tuple, ens.permutations.tolist()))
        assert got == expected

    def test_all_failures_single_assignment(self):
        ens = sample_ensemble(dataset_for((1, 1, 1)), 50, seed=0)
        assert set(map(tuple, ens.permutations.tolist())) == {(0, 1, 2)}

    def test_rough_uniformity_two_assignments(self):
        ens = sample_ensemble(dataset_for((0, 1)), 4000, seed=1)
        frac = np.mean(ens.permutations[:, 0] == 0)
        assert 0.44 < frac < 0.56

    def test_permutations_are_permutations(self):
        rng = np.random.default_rng(2)
        ens = sample_ensemble(random_dataset(rng, 9), 100, seed=3)
        assert np.array_equal(
            np.sort(ens.permutations, axis=1),
            np.broadcast_to(np.arange(9), (100, 9)),
        )


class TestEnvelopes:
    def setup_method(self):
        rng = np.random.default_rng(7)
        self.sd = random_dataset(rng, 8)
        self.ens = sample_ensemble(self.sd, 300, seed=7)

    def test_boundary_columns(self):
        assert np.all(self.ens.lower_env[:, 0] == 0.0)
        assert np.all(self.ens.upper_env[:, -1] == 1.0)

    def test_envelopes_monotone_and_ordered(self):
        assert np.all(np.diff(self.ens.lower_env, axis=1) >= 0)
        assert np.all(np.diff(self.ens.upper_env, axis=1) >= 0)
        assert np.all(self.ens.lower_env <= self.ens.upper_env + 1e-12)

    def test_lower_cdf_moves_only_at_failures(self):
        lo = self.ens.lower_env
        for i, s in enumerate(self.sd.status):
            if s == 0:
                assert np.array_equal(lo[:, i + 1], lo[:, i])
            else:
                assert np.array_equal(lo[:, i + 1], self.ens.assigned[:, i])

    def test_upper_cap_is_smallest_unassigned(self):
        # before any observation the cdf cap is the smallest order statistic
        u = np.sort(self.ens.assigned, axis=1)
        assert np.array_equal(self.ens.upper_env[:, 0], u[:, 0])

    def test_eval_matches_curve_objects(self):
        ts = np.concatenate([[0.0], self.sd.times, self.sd.times + 1e-4, [99.0]])
        up = self.ens.eval_upper(ts)
        lo = self.ens.eval_lower(ts)
        for j in [0, 17, 299]:
            lower, upper = draw_bounds(self.ens.draw(j))
            assert np.allclose(upper(ts), up[j])
            assert np.allclose(lower(ts), lo[j])

    def test_hand_case_one_failure_one_censored(self):
        ens = sample_ensemble(dataset_for((1, 0), times=[1.0, 2.0]), 400, seed=5)
        a, b = ens.assigned[:, 0], ens.assigned[:, 1]
        assert np.all(a <= b)
        assert np.allclose(ens.eval_upper([0.5])[:, 0], 1.0)
        assert np.allclose(ens.eval_upper([1.0])[:, 0], 1.0 - a)
        assert np.allclose(ens.eval_upper([5.0])[:, 0], 1.0 - a)
        assert np.allclose(ens.eval_lower([0.5])[:, 0], 1.0 - a)
        assert np.allclose(ens.eval_lower([1.0])[:, 0], 1.0 - b)
        assert np.allclose(ens.eval_lower([2.0])[:, 0], 0.0)

    def test_validate_passes(self):
        self.ens.validate()


class TestContinuousRepresentative:
    def _constraint_check(self, sd, ens):
        si = ens.eval_interp(sd.times)
        for i, s in enumerate(sd.status):
            col = int(np.flatnonzero(sd.times == sd.times[i])[0])
            if s == 0:
                assert np.all(si[:, col] >= 1.0 - ens.assigned[:, i] - 1e-9)
        # failure anchors pass through 1 - u of the last tied failure
        for t in np.unique(sd.times[sd.status == 1]):
            obs = np.flatnonzero((sd.times == t) & (sd.status == 1))[-1]
            col = int(np.flatnonzero(sd.times == t)[0])
            assert np.allclose(si[:, col], 1.0 - ens.assigned[:, obs])

    def test_constraints_distinct_times(self):
        rng = np.random.default_rng(21)
        sd = random_dataset(rng, 10)
        ens = sample_ensemble(sd, 200, seed=21)
        self._constraint_check(sd, ens)

    def test_constraints_with_ties(self):
        sd = dataset_for((1, 1, 1, 0, 0, 0), times=[1, 1, 2, 2, 3, 3])
        ens = sample_ensemble(sd, 500, seed=22)
        self._constraint_check(sd, ens)

    def test_matches_per_draw_construction(self):
        rng = np.random.default_rng(23)
        sd = random_dataset(rng, 7)
        ens = sample_ensemble(sd, 40, seed=23)
        ts = np.linspace(0.0, float(sd.times[-1]) * 1.5, 23)
        batched = ens.eval_interp(ts)
        for j in [0, 13, 39]:
            curve = log_linear_curve(ens.draw(j))
            assert np.allclose(curve(ts), batched[j])
            same = ens.interp_curve(j)
            assert np.allclose(same(ts), batched[j])

    def test_curves_are_valid_loglinear(self):
        # the constructor enforces monotone nonincreasing log survival
        rng = np.random.default_rng(24)
        sd = random_dataset(rng, 9, censor_prob=0.6)
        ens = sample_ensemble(sd, 150, seed=24)
        for j in range(150):
            ens.interp_curve(j)
        assert np.all(ens.tail_slopes <= 0)

    def test_tail_slope_negative_with_trailing_censoring(self):
        ens = sample_ensemble(dataset_for((1, 0, 0)), 300, seed=25)
        assert np.all(ens.tail_slopes < 0)

    def test_rejects_time_zero(self):
        sd = dataset_for((1, 1), times=[0.0, 1.0])
        with pytest.raises(ValueError):
            sample_ensemble(sd, 10, seed=0)


class TestAllCensored:
    def setup_method(self):
        self.sd = dataset_for((0, 0, 0))

    def test_envelopes_still_available(self):
        ens = sample_ensemble(self.sd, 50, seed=9)
        assert not ens.has_interpolation
        assert ens.eval_upper([2.0]).shape == (50, 1)
        assert np.all(ens.eval_upper([2.0]) == 1.0)

    def test_interp_accessors_raise(self):
        ens = sample_ensemble(self.sd, 50, seed=9)
        with pytest.raises(NoFailures):
            ens.eval_interp([1.0])
        with pytest.raises(NoFailures):
            ens.interp_curve(0)

    def test_beta_product_raises(self):
        with pytest.raises(NoFailures):
            beta_product_batch(self.sd, 10, np.random.default_rng(0))


class TestBetaProductRoute:
    def test_mean_matches_closed_form(self):
        rng = np.random.default_rng(31)
        sd = random_dataset(rng, 12)
        s, vals = beta_product_batch(sd, 20000, np.random.default_rng(32))
        assert np.array_equal(s, sd.event_times)
        mean = vals.mean(axis=0)
        se = vals.std(axis=0) / np.sqrt(20000)
        assert np.all(np.abs(mean - expected_upper_bound(sd)) <= 5 * se + 1e-12)

    def test_permutation_route_same_mean(self):
        rng = np.random.default_rng(33)
        sd = random_dataset(rng, 12)
        ens = sample_ensemble(sd, 20000, seed=34)
        up = ens.eval_upper(sd.event_times)
        se = up.std(axis=0) / np.sqrt(20000)
        assert np.all(np.abs(up.mean(axis=0) - expected_upper_bound(sd)) <= 5 * se + 1e-12)
        lo = ens.eval_lower(sd.event_times)
        se = lo.std(axis=0) / np.sqrt(20000)
        assert np.all(np.abs(lo.mean(axis=0) - expected_lower_bound(sd)) <= 5 * se + 1e-12)

    def test_two_routes_agree_in_distribution(self):
        rng = np.random.default_rng(35)
        sd = random_dataset(rng, 10)
        ens = sample_ensemble(sd, 20000, seed=36)
        _, beta_vals = beta_product_batch(sd, 20000, np.random.default_rng(37))
        mid = sd.event_times[sd.event_times.size // 2]
        perm_vals = ens.eval_upper([mid])[:, 0]
        assert ks_2samp(perm_vals, beta_vals[:, sd.event_times.size // 2]).pvalue > 1e-4

    def test_single_draw_curve(self):
        sd = dataset_for((1, 1, 0))
        curve = beta_product_draw(sd, np.random.default_rng(38))
        assert curve.knots.tolist() == [1.0, 2.0]
        assert 0.0 <= curve(2.0) <= curve(1.0) <= 1.0

    def test_tied_failures_consume_risk_one_by_one(self):
        sd = dataset_for((1, 1, 1, 1), times=[1, 1, 1, 2])
        _, vals = beta_product_batch(sd, 30000, np.random.default_rng(39))
        mean = vals.mean(axis=0)
        se = vals.std(axis=0) / np.sqrt(30000)
        assert np.all(np.abs(mean - expected_upper_bound(sd)) <= 5 * se + 1e-12)


class TestDeterminism:
    def test_same_seed_same_draws(self):
        sd = dataset_for((1, 0, 1, 0, 1))
        a = sample_ensemble(sd, 64, seed=11)
        b = sample_ensemble(sd, 64, seed=11)
        assert np.array_equal(a.assigned, b.assigned)
        assert np.array_equal(a.permutations, b.permutations)
        assert a.fingerprint() == b.fingerprint()

    def test_int_seed_is_stream_zero(self):
        sd = dataset_for((1, 0, 1))
        a = sample_ensemble(sd, 16, seed=11)
        b = sample_ensemble(sd, 16, seed=RngStream(11, 0))
        assert np.array_equal(a.assigned, b.assigned)

    def test_streams_differ(self):
        sd = dataset_for((1, 0, 1))
        a = sample_ensemble(sd, 16, seed=RngStream(11, 0))
        b = sample_ensemble(sd, 16, seed=RngStream(11, 1))
        assert not np.array_equal(a.assigned, b.assigned)
        assert a.fingerprint() != b.fingerprint()

    def test_generator_seed_accepted(self):
        sd = dataset_for((1, 0, 1))
        ens = sample_ensemble(sd, 8, seed=np.random.default_rng(0))
        assert ens.seed_entropy is None

    def test_seed_sequence_children_distinct(self):
        sd = dataset_for((1, 0, 1))
        kids = np.random.SeedSequence(5).spawn(2)
        a = sample_ensemble(sd, 16, seed=kids[0])
        b = sample_ensemble(sd, 16, seed=kids[1])
        assert not np.array_equal(a.assigned, b.assigned)
        assert a.fingerprint() != b.fingerprint()

    def test_rejects_nonpositive_m(self):
        with pytest.raises(ValueError):
            sample_ensemble(dataset_for((1,)), 0, seed=0)


class TestSingleDraw:
    def test_shapes_and_sandwich(self):
        sd = dataset_for((1, 0, 1, 1, 0))
        draw = sample_permutation(sd, np.random.default_rng(4))
        assert draw.uniforms.shape == (5,)
        assert sorted(draw.permutation.tolist()) == [0, 1, 2, 3, 4]
        lower, upper = draw_bounds(draw)
        for t in [0.5, 1.0, 2.5, 4.0, 10.0]:
            assert lower(t) <= upper(t) + 1e-12
