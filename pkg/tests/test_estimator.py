"""Conservative tail-mass estimator: LP form, bisection, and invariants."""

import numpy as np
import pytest

from tailmass.ecdf import EmpiricalCdf, dkw_threshold, sup_distance
from tailmass.errors import ModelMisfitError
from tailmass.estimator import (
    EstimatorConfig,
    estimate_curve,
    estimate_zeta,
    estimate_zeta_bisect,
    make_grid,
)
from tailmass.estimator import test_statistic as fit_statistic
from tailmass.kernels import MixingDistribution, ObservationModel

GAUSS = ObservationModel.gaussian(1.0)


def _two_spike(seed, n, zeta_star, gamma_star, sigma=1.0):
    rng = np.random.default_rng(seed)
    means = np.where(rng.random(n) < zeta_star, gamma_star, 0.0)
    return EmpiricalCdf(rng.normal(means, sigma))


class TestMakeGrid:
    def test_contains_query_threshold_exactly(self):
        ecdf = EmpiricalCdf(np.random.default_rng(0).normal(size=100))
        grid = make_grid(GAUSS, ecdf, 0.37, EstimatorConfig())
        assert 0.37 in grid.points
        assert 0.0 in grid.points
        assert np.all(np.diff(grid.points) > 0)

    def test_spans_padded_sample_range(self):
        ecdf = EmpiricalCdf(np.array([-3.0, 4.0]))
        grid = make_grid(GAUSS, ecdf, 0.0, EstimatorConfig(grid_pad=3.0))
        assert grid.points[0] <= -6.0 + 1e-9
        assert grid.points[-1] >= 7.0 - 1e-9

    def test_binomial_grid_stays_in_unit_interval(self):
        ecdf = EmpiricalCdf(np.array([2.0, 5.0, 19.0]))
        grid = make_grid(ObservationModel.binomial(20), ecdf, 0.5, EstimatorConfig())
        assert grid.points[0] >= 0.0 and grid.points[-1] <= 1.0
        assert 0.5 in grid.points

    def test_poisson_grid_nonnegative(self):
        ecdf = EmpiricalCdf(np.array([0.0, 1.0, 7.0]))
        grid = make_grid(ObservationModel.poisson(), ecdf, 1.0, EstimatorConfig())
        assert grid.points[0] >= 0.0
        assert 1.0 in grid.points

    def test_threshold_outside_domain_rejected(self):
        ecdf = EmpiricalCdf(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            make_grid(ObservationModel.binomial(10), ecdf, 1.5, EstimatorConfig())


class TestEstimateZeta:
    def test_single_sample_band_is_vacuous(self):
        est = estimate_zeta(EmpiricalCdf(np.array([3.0])), GAUSS, 0.0)
        assert est.zeta_hat == 0.0
        assert est.status == "vacuous"
        assert est.tau > 1.0

    def test_null_data_estimates_zero_tail(self):
        rng = np.random.default_rng(12)
        ecdf = EmpiricalCdf(rng.normal(0.0, 1.0, 2000))
        est = estimate_zeta(ecdf, GAUSS, 0.0)
        assert est.zeta_hat == 0.0
        assert est.status == "optimal"

    def test_two_spike_signal_detected_but_not_overestimated(self):
        for seed in (0, 1, 2):
            ecdf = _two_spike(seed, 10_000, 0.1, 2.0)
            est = estimate_zeta(ecdf, GAUSS, 0.0)
            assert 0.0 < est.zeta_hat < 0.1

    def test_estimate_metadata(self):
        ecdf = _two_spike(3, 500, 0.1, 2.0)
        cfg = EstimatorConfig(alpha=0.1)
        est = estimate_zeta(ecdf, GAUSS, 0.5, cfg)
        assert est.gamma == 0.5
        assert est.alpha == 0.1
        assert est.n == 500
        assert est.tau == pytest.approx(dkw_threshold(0.1, 500))
        assert est.method == "direct_lp"

    def test_fitted_mixture_respects_band_up_to_coarsening(self):
        ecdf = _two_spike(5, 2000, 0.1, 2.0)
        est = estimate_zeta(ecdf, GAUSS, 0.0)
        # the witness satisfies the band at constraint points; between them
        # it can drift by at most the mass the coarsening grouped together
        assert est.residual <= est.tau + 0.01

    def test_three_atom_mixture_detected_at_multiple_thresholds(self):
        # 15% of means sit at 2 or above, 5% at 4; the curve should flag
        # meaningful mass above both 0 and 1 without ever overestimating
        truth = MixingDistribution([0.0, 2.0, 4.0], [0.85, 0.10, 0.05])
        for seed in (0, 1, 2):
            rng = np.random.default_rng(seed)
            means = rng.choice(truth.support, size=10_000, p=truth.weights)
            ecdf = EmpiricalCdf(rng.normal(means, 1.0))
            curve = estimate_curve(ecdf, GAUSS, [0.0, 1.0, 3.0])
            z0, z1, z3 = [entry.zeta_hat for entry in curve.entries]
            assert 0.10 <= z0 <= 0.15
            assert 0.03 <= z1 <= 0.15
            assert z3 <= 0.05

    def test_poisson_mixture_detection(self):
        rng = np.random.default_rng(8)
        means = np.where(rng.random(4000) < 0.5, 10.0, 1.0)
        ecdf = EmpiricalCdf(rng.poisson(means).astype(float))
        est = estimate_zeta(ecdf, ObservationModel.poisson(), 5.0)
        assert 0.2 < est.zeta_hat <= 0.5

    def test_binomial_mixture_detection(self):
        rng = np.random.default_rng(8)
        means = np.where(rng.random(4000) < 0.3, 0.9, 0.2)
        ecdf = EmpiricalCdf(rng.binomial(20, means).astype(float))
        est = estimate_zeta(ecdf, ObservationModel.binomial(20), 0.5)
        assert 0.1 < est.zeta_hat <= 0.3

    def test_incompatible_integer_kernel_raises_misfit(self):
        # three non-integer clusters force the CDF of any integer-supported
        # mixture to miss the band at the observed jumps
        values = np.concatenate([np.full(33, 0.1), np.full(33, 0.5), np.full(33, 0.9)])
        ecdf = EmpiricalCdf(values)
        with pytest.raises(ModelMisfitError):
            estimate_zeta(ecdf, ObservationModel.binomial(2), 0.5)
        with pytest.raises(ModelMisfitError):
            estimate_zeta_bisect(ecdf, ObservationModel.binomial(2), 0.5)


class TestTestStatistic:
    def test_nonincreasing_in_allowed_tail(self):
        ecdf = _two_spike(1, 1000, 0.1, 2.0)
        grid = make_grid(GAUSS, ecdf, 0.0, EstimatorConfig())
        values = [
            fit_statistic(ecdf, GAUSS, 0.0, z, grid=grid)
            for z in (0.0, 0.02, 0.05, 0.1, 0.5, 1.0)
        ]
        assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))

    def test_unconstrained_statistic_lower_bounds_any_candidate(self):
        rng = np.random.default_rng(2)
        ecdf = EmpiricalCdf(rng.normal(0.0, 1.0, 400))
        best_fit = fit_statistic(ecdf, GAUSS, 0.0, 1.0)
        candidate = sup_distance(ecdf, GAUSS, MixingDistribution.point(0.0))
        assert best_fit <= candidate + 1e-9

    def test_null_kernel_data_statistic_is_small(self):
        rng = np.random.default_rng(3)
        ecdf = EmpiricalCdf(rng.normal(0.0, 1.0, 5000))
        value = fit_statistic(ecdf, GAUSS, 0.0, 0.0)
        assert value <= sup_distance(ecdf, GAUSS, MixingDistribution.point(0.0)) + 1e-9
        assert value < 0.05

    def test_zeta_validation(self):
        ecdf = EmpiricalCdf(np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            fit_statistic(ecdf, GAUSS, 0.0, 1.5)


class TestBisect:
    def test_matches_exhaustive_scan_on_tiny_sample(self):
        # n=8: compare against testing every allowed tail i/8 directly
        rng = np.random.default_rng(4)
        samples = rng.normal([-0.1, -0.1, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0], 1.0)
        ecdf = EmpiricalCdf(samples)
        cfg = EstimatorConfig(alpha=0.3)
        tau = dkw_threshold(0.3, 8)
        assert tau < 1.0
        grid = make_grid(GAUSS, ecdf, 0.5, cfg)
        i_min = 0
        for i in range(9):
            if fit_statistic(ecdf, GAUSS, 0.5, i / 8, cfg, grid=grid) > tau:
                i_min = i
        est = estimate_zeta_bisect(ecdf, GAUSS, 0.5, cfg, grid=grid)
        assert est.zeta_hat == pytest.approx(i_min / 8, abs=1e-12)

    def test_null_data_returns_zero(self):
        rng = np.random.default_rng(6)
        ecdf = EmpiricalCdf(rng.normal(0.0, 1.0, 600))
        est = estimate_zeta_bisect(ecdf, GAUSS, 0.0)
        assert est.zeta_hat == 0.0
        assert est.method == "bisect"

    def test_agrees_with_direct_lp_within_grid_resolution(self):
        for seed in range(5):
            n = 200 + 50 * seed
            ecdf = _two_spike(seed, n, 0.2, 2.5)
            direct = estimate_zeta(ecdf, GAUSS, 0.0)
            bisect = estimate_zeta_bisect(ecdf, GAUSS, 0.0)
            assert abs(direct.zeta_hat - bisect.zeta_hat) <= 1.0 / n + 1e-6

    def test_bisect_value_is_a_multiple_of_one_over_n(self):
        ecdf = _two_spike(11, 320, 0.15, 2.0)
        est = estimate_zeta_bisect(ecdf, GAUSS, 0.0)
        assert est.zeta_hat * 320 == pytest.approx(round(est.zeta_hat * 320), abs=1e-9)


class TestEstimateCurve:
    def test_nonincreasing_in_threshold(self):
        ecdf = _two_spike(7, 5000, 0.15, 2.0)
        curve = estimate_curve(ecdf, GAUSS, [0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
        values = [entry.zeta_hat for entry in curve.entries]
        assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))

    def test_single_threshold_reduces_to_estimate_zeta(self):
        ecdf = _two_spike(9, 800, 0.1, 2.0)
        curve = estimate_curve(ecdf, GAUSS, [0.0])
        grid = make_grid(GAUSS, ecdf, 0.0, EstimatorConfig())
        single = estimate_zeta(ecdf, GAUSS, 0.0, grid=grid)
        assert curve.entries[0].zeta_hat == pytest.approx(single.zeta_hat, abs=1e-6)

    def test_thresholds_must_strictly_increase(self):
        ecdf = EmpiricalCdf(np.array([0.0, 1.0, 2.0]))
        with pytest.raises(ValueError):
            estimate_curve(ecdf, GAUSS, [0.0, 0.0, 1.0])
        with pytest.raises(ValueError):
            estimate_curve(ecdf, GAUSS, [1.0, 0.0])

    def test_bisect_curve_also_nonincreasing(self):
        ecdf = _two_spike(13, 600, 0.2, 2.0)
        cfg = EstimatorConfig(method="bisect")
        curve = estimate_curve(ecdf, GAUSS, [0.0, 1.0, 2.0], cfg)
        values = [entry.zeta_hat for entry in curve.entries]
        assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
        assert all(entry.method == "bisect" for entry in curve.entries)


class TestConfigEffects:
    def test_looser_alpha_never_decreases_the_estimate(self):
        ecdf = _two_spike(9, 3000, 0.15, 2.0)
        values = [
            estimate_zeta(ecdf, GAUSS, 0.0, EstimatorConfig(alpha=a)).zeta_hat
            for a in (0.01, 0.05, 0.2, 0.5)
        ]
        assert all(a <= b + 1e-9 for a, b in zip(values, values[1:]))

    def test_richer_mean_grid_never_increases_the_estimate(self):
        ecdf = _two_spike(9, 3000, 0.15, 2.0)
        values = [
            estimate_zeta(ecdf, GAUSS, 0.0, EstimatorConfig(grid_points=g)).zeta_hat
            for g in (50, 100, 200, 400)
        ]
        assert all(a >= b - 1e-6 for a, b in zip(values, values[1:]))

    def test_coarser_constraints_never_increase_the_estimate(self):
        ecdf = _two_spike(9, 3000, 0.15, 2.0)
        values = [
            estimate_zeta(
                ecdf, GAUSS, 0.0, EstimatorConfig(max_constraint_points=c)
            ).zeta_hat
            for c in (16, 64, 256, 1024)
        ]
        assert all(a <= b + 1e-6 for a, b in zip(values, values[1:]))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EstimatorConfig(alpha=0.0)
        with pytest.raises(ValueError):
            EstimatorConfig(grid_points=2)
        with pytest.raises(ValueError):
            EstimatorConfig(method="magic")
