"""Observation kernels, their CDF/PMF grids, and mixing distributions."""

import math

import numpy as np
import pytest

from tailmass.kernels import (
    Family,
    MixingDistribution,
    ObservationModel,
    kernel_cdf,
    kernel_cdf_grid,
    kernel_pdf_grid,
    mixture_cdf,
    mixture_tail,
)


def _poisson_cdf_by_summation(mu: float, k: int) -> float:
    # independent oracle: direct pmf summation with exact factorials
    total = 0.0
    for j in range(k + 1):
        total += mu**j * math.exp(-mu) / math.factorial(j)
    return total


def _binomial_cdf_by_summation(trials: int, p: float, k: int) -> float:
    total = 0.0
    for j in range(k + 1):
        total += math.comb(trials, j) * p**j * (1 - p) ** (trials - j)
    return total


class TestObservationModel:
    def test_family_constructors(self):
        assert ObservationModel.gaussian(2.0).family is Family.GAUSSIAN
        assert ObservationModel.poisson().family is Family.POISSON
        assert ObservationModel.binomial(20).trials == 20

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            ObservationModel.gaussian(0.0)
        with pytest.raises(ValueError):
            ObservationModel.gaussian(-1.0)
        with pytest.raises(ValueError):
            ObservationModel.binomial(0)

    def test_mean_domains(self):
        gauss = ObservationModel.gaussian(1.0)
        assert gauss.contains_mean(-5.0) and gauss.contains_mean(5.0)
        pois = ObservationModel.poisson()
        assert pois.contains_mean(0.5) and not pois.contains_mean(-0.1)
        binom = ObservationModel.binomial(10)
        assert binom.contains_mean(0.5) and not binom.contains_mean(1.5)

    def test_validate_means_raises_outside_domain(self):
        with pytest.raises(ValueError):
            ObservationModel.poisson().validate_means(np.array([1.0, -2.0]))
        with pytest.raises(ValueError):
            ObservationModel.binomial(5).validate_means(np.array([0.5, 2.0]))


class TestKernelCdf:
    def test_gaussian_matches_error_function(self):
        model = ObservationModel.gaussian(1.5)
        for mu, t in [(0.0, 0.0), (1.0, 2.5), (-2.0, -3.0), (0.3, 0.3)]:
            expected = 0.5 * (1.0 + math.erf((t - mu) / (1.5 * math.sqrt(2.0))))
            assert kernel_cdf(model, mu, t) == pytest.approx(expected, abs=1e-14)

    def test_gaussian_symmetry_at_mean(self):
        model = ObservationModel.gaussian(0.7)
        assert kernel_cdf(model, 1.2, 1.2) == pytest.approx(0.5, abs=1e-14)

    def test_poisson_matches_pmf_summation(self):
        model = ObservationModel.poisson()
        for mu, k in [(0.5, 0), (1.0, 3), (4.2, 7), (10.0, 2)]:
            assert kernel_cdf(model, mu, float(k)) == pytest.approx(
                _poisson_cdf_by_summation(mu, k), abs=1e-12
            )

    def test_poisson_is_a_step_function_between_integers(self):
        model = ObservationModel.poisson()
        assert kernel_cdf(model, 2.0, 3.0) == kernel_cdf(model, 2.0, 3.9)
        assert kernel_cdf(model, 2.0, -0.5) == 0.0

    def test_binomial_matches_pmf_summation(self):
        model = ObservationModel.binomial(20)
        for p, k in [(0.5, 10), (0.2, 3), (0.9, 19), (0.5, 0)]:
            assert kernel_cdf(model, p, float(k)) == pytest.approx(
                _binomial_cdf_by_summation(20, p, k), abs=1e-12
            )

    def test_binomial_top_cell_is_exact_power_of_two(self):
        # fair-coin chance of 20 successes in 20 trials is exactly 2^-20
        model = ObservationModel.binomial(20)
        assert 1.0 - kernel_cdf(model, 0.5, 19.0) == pytest.approx(
            2.0**-20, abs=1e-16
        )

    def test_binomial_degenerate_success_probabilities(self):
        model = ObservationModel.binomial(5)
        assert kernel_cdf(model, 0.0, 0.0) == 1.0
        assert kernel_cdf(model, 1.0, 4.0) == 0.0
        assert kernel_cdf(model, 1.0, 5.0) == 1.0

    def test_mean_outside_domain_rejected(self):
        with pytest.raises(ValueError):
            kernel_cdf(ObservationModel.poisson(), -1.0, 0.0)


class TestKernelGrids:
    def test_cdf_grid_shape_and_pointwise_agreement(self):
        model = ObservationModel.gaussian(1.0)
        mus = np.array([-1.0, 0.0, 2.0])
        ts = np.array([-0.5, 0.0, 0.5, 1.0])
        grid = kernel_cdf_grid(model, mus, ts)
        assert grid.shape == (4, 3)
        for i, t in enumerate(ts):
            for j, mu in enumerate(mus):
                assert grid[i, j] == pytest.approx(kernel_cdf(model, mu, t), abs=1e-14)

    def test_cdf_grid_monotone_in_threshold_and_mean(self):
        model = ObservationModel.poisson()
        mus = np.linspace(0.1, 6.0, 9)
        ts = np.arange(0.0, 12.0)
        grid = kernel_cdf_grid(model, mus, ts)
        assert np.all(np.diff(grid, axis=0) >= -1e-12)  # rising in t
        assert np.all(np.diff(grid, axis=1) <= 1e-12)  # falling in mean

    def test_pdf_grid_rows_sum_to_one_for_counting_kernels(self):
        model = ObservationModel.binomial(12)
        mus = np.array([0.0, 0.25, 0.5, 1.0])
        ks = np.arange(0.0, 13.0)
        pmf = kernel_pdf_grid(model, mus, ks)
        assert np.allclose(pmf.sum(axis=0), 1.0, atol=1e-12)
        assert np.all(pmf >= 0.0)

    def test_pdf_grid_matches_gaussian_density(self):
        model = ObservationModel.gaussian(0.5)
        mus = np.array([0.0, 1.0])
        xs = np.array([-0.3, 0.4])
        dens = kernel_pdf_grid(model, mus, xs)
        for i, x in enumerate(xs):
            for j, mu in enumerate(mus):
                expected = math.exp(-((x - mu) ** 2) / (2 * 0.25)) / (
                    0.5 * math.sqrt(2 * math.pi)
                )
                assert dens[i, j] == pytest.approx(expected, rel=1e-12)


class TestMixingDistribution:
    def test_point_mass(self):
        nu = MixingDistribution.point(1.5)
        assert nu.n_atoms == 1
        assert mixture_tail(nu, 1.0) == 1.0
        assert mixture_tail(nu, 1.5) == 0.0  # strictly-above convention

    def test_support_must_increase(self):
        with pytest.raises(ValueError):
            MixingDistribution([1.0, 1.0], [0.5, 0.5])
        with pytest.raises(ValueError):
            MixingDistribution([2.0, 1.0], [0.5, 0.5])

    def test_weights_validated(self):
        with pytest.raises(ValueError):
            MixingDistribution([0.0, 1.0], [0.7, 0.6])
        with pytest.raises(ValueError):
            MixingDistribution([0.0, 1.0], [-0.1, 1.1])

    def test_tail_is_a_right_continuous_step_in_gamma(self):
        nu = MixingDistribution([0.0, 1.0, 3.0], [0.5, 0.3, 0.2])
        assert mixture_tail(nu, -1.0) == 1.0
        assert mixture_tail(nu, 0.0) == pytest.approx(0.5)
        assert mixture_tail(nu, 0.5) == pytest.approx(0.5)
        assert mixture_tail(nu, 1.0) == pytest.approx(0.2)
        assert mixture_tail(nu, 3.0) == 0.0

    def test_mixture_cdf_is_weighted_kernel_average(self):
        model = ObservationModel.gaussian(1.0)
        nu = MixingDistribution([0.0, 2.0], [0.75, 0.25])
        for t in [-1.0, 0.0, 1.3, 4.0]:
            expected = 0.75 * kernel_cdf(model, 0.0, t) + 0.25 * kernel_cdf(
                model, 2.0, t
            )
            assert mixture_cdf(model, nu, t) == pytest.approx(expected, abs=1e-14)

    def test_mixture_cdf_vectorized_over_thresholds(self):
        model = ObservationModel.poisson()
        nu = MixingDistribution([0.5, 4.0], [0.5, 0.5])
        ts = np.array([0.0, 1.0, 2.0, 8.0])
        values = mixture_cdf(model, nu, ts)
        assert values.shape == ts.shape
        for t, v in zip(ts, values):
            assert v == pytest.approx(mixture_cdf(model, nu, float(t)), abs=1e-14)
