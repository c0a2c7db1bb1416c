"""Closed-form separation quantities and the population-distance program."""

import math

import numpy as np
import pytest

from tailmass.kernels import MixingDistribution, ObservationModel, mixture_cdf
from tailmass.oracles import (
    detection_distance_bound,
    detection_distance_bound_small_gamma,
    estimation_distance_bound,
    extremal_points,
    nu_opt,
    population_min_distance,
)

GAUSS = ObservationModel.gaussian(1.0)


def _two_spike_mixture(zeta_star, gamma_star):
    return MixingDistribution([0.0, gamma_star], [1.0 - zeta_star, zeta_star])


class TestExtremalPoints:
    def test_frozen_unit_case(self):
        t_plus, t_minus = extremal_points(1.0)
        assert t_plus == pytest.approx(-0.08503850194838769, abs=1e-15)
        assert t_minus == pytest.approx(2.0850385019483877, abs=1e-15)

    def test_midpoint_recovers_the_effect_size(self):
        for gamma in (0.25, 0.5, 1.0, 2.0, 3.0):
            t_plus, t_minus = extremal_points(gamma)
            assert 0.5 * (t_plus + t_minus) == pytest.approx(gamma, abs=1e-12)

    def test_points_are_stationary_for_the_cdf_gap(self):
        # both points must be critical points of the signed CDF difference
        # between the spiked truth and its tail-halved competitor
        zeta, gamma = 0.1, 1.0
        truth = _two_spike_mixture(zeta, gamma)
        competitor = nu_opt(zeta, gamma)

        def gap(t):
            return mixture_cdf(GAUSS, truth, t) - mixture_cdf(GAUSS, competitor, t)

        h = 1e-6
        for t in extremal_points(gamma):
            slope = (gap(t + h) - gap(t - h)) / (2 * h)
            assert abs(slope) < 1e-6

    def test_gap_magnitudes_match_at_both_points(self):
        for gamma in (0.25, 0.5, 1.0, 2.0):
            zeta = 0.2
            truth = _two_spike_mixture(zeta, gamma)
            competitor = nu_opt(zeta, gamma)
            t_plus, t_minus = extremal_points(gamma)
            g_plus = mixture_cdf(GAUSS, truth, t_plus) - mixture_cdf(
                GAUSS, competitor, t_plus
            )
            g_minus = mixture_cdf(GAUSS, truth, t_minus) - mixture_cdf(
                GAUSS, competitor, t_minus
            )
            assert abs(g_plus) == pytest.approx(abs(g_minus), abs=1e-8)
            assert g_plus * g_minus < 0  # opposite signs

    def test_invalid_gamma_rejected(self):
        with pytest.raises(ValueError):
            extremal_points(0.0)
        with pytest.raises(ValueError):
            extremal_points(-1.0)


class TestNuOpt:
    def test_structure(self):
        nu = nu_opt(0.1, 1.0)
        assert np.allclose(nu.support, [0.0, 2.0])
        assert np.allclose(nu.weights, [0.95, 0.05])

    def test_tail_is_half_the_original(self):
        from tailmass.kernels import mixture_tail

        for zeta, gamma in [(0.05, 0.5), (0.2, 1.0), (0.4, 2.0)]:
            nu = nu_opt(zeta, gamma)
            assert mixture_tail(nu, gamma) == pytest.approx(zeta / 2.0, abs=1e-15)


class TestDistanceBounds:
    def test_detection_bound_closed_form(self):
        # zeta times the kernel mass the effect moves across the midpoint
        for zeta, gamma, sigma in [(0.1, 1.0, 1.0), (0.3, 0.5, 2.0), (0.05, 2.0, 0.5)]:
            phi = lambda t: 0.5 * (1.0 + math.erf(t / (sigma * math.sqrt(2.0))))
            expected = zeta * (phi(gamma / 2.0) - phi(-gamma / 2.0))
            assert detection_distance_bound(zeta, gamma, sigma) == pytest.approx(
                expected, abs=1e-14
            )

    def test_frozen_detection_values(self):
        assert detection_distance_bound(0.1, 1.0, 1.0) == pytest.approx(
            0.03829249225480263, abs=1e-15
        )
        assert detection_distance_bound_small_gamma(0.1, 1.0, 1.0) == pytest.approx(
            0.03823196853847064, abs=1e-15
        )

    def test_small_gamma_form_lower_bounds_exact_form(self):
        # the first-order form keeps a deliberate 23/24 safety factor, so it
        # sits below the exact separation and approaches exact * 23/24 as the
        # threshold shrinks
        for gamma in (0.01, 0.1, 0.5, 1.0):
            exact = detection_distance_bound(0.1, gamma, 1.0)
            small = detection_distance_bound_small_gamma(0.1, gamma, 1.0)
            assert small <= exact + 1e-15
        exact = detection_distance_bound(0.1, 0.01, 1.0)
        small = detection_distance_bound_small_gamma(0.1, 0.01, 1.0)
        assert exact / small == pytest.approx(24.0 / 23.0, rel=1e-3)

    def test_estimation_bound_closed_form(self):
        assert estimation_distance_bound(0.1, 1.0, 1.0) == pytest.approx(0.001)
        assert estimation_distance_bound(0.2, 0.5, 2.0) == pytest.approx(
            0.01 * (0.5 / 2.0) ** 2 * 0.2
        )

    def test_bound_parameter_validation(self):
        with pytest.raises(ValueError):
            detection_distance_bound(0.0, 1.0)
        with pytest.raises(ValueError):
            detection_distance_bound(0.1, -1.0)
        with pytest.raises(ValueError):
            estimation_distance_bound(0.1, 1.0, 0.0)


class TestPopulationMinDistance:
    def _grid(self, gamma_star):
        base = np.linspace(-4.0, 4.0, 161)
        return np.unique(np.concatenate([base, [0.0, gamma_star, 2.0 * gamma_star]]))

    def test_zero_when_cap_admits_the_truth(self):
        zeta, gamma = 0.1, 1.0
        truth = _two_spike_mixture(zeta, gamma)
        grid = self._grid(gamma)
        dist = population_min_distance(GAUSS, truth, zeta, 0.0, grid)
        assert dist == pytest.approx(0.0, abs=1e-7)

    def test_nonincreasing_in_the_tail_cap(self):
        zeta, gamma = 0.2, 1.0
        truth = _two_spike_mixture(zeta, gamma)
        grid = self._grid(gamma)
        dists = [
            population_min_distance(GAUSS, truth, cap, 0.0, grid)
            for cap in (0.0, 0.05, 0.1, 0.2)
        ]
        assert all(a >= b - 1e-9 for a, b in zip(dists, dists[1:]))
        assert dists[0] > 0.0

    def test_halved_tail_sandwich_at_one_configuration(self):
        # the forced-distance lower bound and the explicit two-atom
        # competitor must bracket the LP value
        zeta, gamma = 0.1, 1.0
        truth = _two_spike_mixture(zeta, gamma)
        grid = self._grid(gamma)
        value = population_min_distance(GAUSS, truth, zeta / 2.0, 0.0, grid)
        lower = estimation_distance_bound(zeta, gamma, 1.0)
        competitor = nu_opt(zeta, gamma)
        ts = np.linspace(-9.0, 11.0, 100_001)
        upper = float(
            np.abs(
                np.asarray(mixture_cdf(GAUSS, truth, ts))
                - np.asarray(mixture_cdf(GAUSS, competitor, ts))
            ).max()
        )
        assert lower - 1e-9 <= value <= upper + 1e-7

    def test_cap_validation(self):
        truth = _two_spike_mixture(0.1, 1.0)
        with pytest.raises(ValueError):
            population_min_distance(GAUSS, truth, 1.5, 0.0, self._grid(1.0))
