"""Closed-form quantities for two-spike Gaussian configurations.

For data where a fraction zeta_star of latent means sit at gamma_star > 0
and the rest at 0 (unit-scale Gaussian kernel unless stated otherwise),
these functions give the worst-case alternatives and separation bounds that
the estimator's error analysis rests on.  They serve as independent ground
truth for the simulation experiments and the test suite.
"""

from __future__ import annotations

import math

import numpy as np

from . import lp
from .kernels import MixingDistribution, ObservationModel, kernel_cdf_grid, mixture_cdf
from .errors import NumericalError


def extremal_points(gamma_star: float) -> tuple[float, float]:
    """Where the hardest indistinguishable alternative's CDF crosses the truth.

    For the unit-scale two-spike configuration, the alternative moving half
    the spike mass to 2*gamma_star produces a CDF difference that changes
    sign at exactly two points, returned here as (t_plus, t_minus) with
    t_plus < gamma_star < t_minus.  Their midpoint is gamma_star exactly.
    """
    if not (gamma_star > 0 and math.isfinite(gamma_star)):
        raise ValueError(f"gamma_star must be positive and finite, got {gamma_star}")
    s = math.sqrt(-math.expm1(-gamma_star * gamma_star))
    # log(1 - s) = -gamma^2 - log1p(s) via the conjugate, for stability and
    # so the midpoint identity holds to the last bit
    log_one_minus = -gamma_star * gamma_star - math.log1p(s)
    log_one_plus = math.log1p(s)
    t_plus = 1.5 * gamma_star + log_one_minus / gamma_star
    t_minus = 1.5 * gamma_star + log_one_plus / gamma_star
    return t_plus, t_minus


def nu_opt(zeta_star: float, gamma_star: float) -> MixingDistribution:
    """The hardest alternative: half the spike mass pushed to 2*gamma_star.

    Among mixing distributions whose tail mass above gamma_star is only
    zeta_star/2, this one's mixture CDF comes closest to the two-spike
    truth, so it calibrates how much data separating the two requires.
    """
    if not (0.0 < zeta_star <= 1.0):
        raise ValueError(f"zeta_star must be in (0, 1], got {zeta_star}")
    if not (gamma_star > 0 and math.isfinite(gamma_star)):
        raise ValueError(f"gamma_star must be positive and finite, got {gamma_star}")
    return MixingDistribution(
        np.array([0.0, 2.0 * gamma_star]),
        np.array([1.0 - zeta_star / 2.0, zeta_star / 2.0]),
    )


def detection_distance_bound(zeta: float, gamma: float, sigma: float = 1.0) -> float:
    """Lower bound on the CDF gap between the two-spike truth and a null.

    The sup-distance between the mixture CDFs with and without a zeta-mass
    spike at gamma is at least zeta * (Phi(gamma/2) - Phi(-gamma/2)) with
    Phi the kernel CDF at scale sigma; detecting any tail mass at all needs
    the band to be narrower than this.
    """
    _check_zgs(zeta, gamma, sigma)
    model = ObservationModel.gaussian(sigma)
    half = gamma / 2.0
    gap = kernel_cdf_grid(model, np.array([0.0]), np.array([half]))[0, 0] - kernel_cdf_grid(
        model, np.array([0.0]), np.array([-half])
    )[0, 0]
    return zeta * float(gap)


def detection_distance_bound_small_gamma(zeta: float, gamma: float, sigma: float = 1.0) -> float:
    """First-order form of detection_distance_bound, valid for gamma < sigma."""
    _check_zgs(zeta, gamma, sigma)
    return 23.0 * zeta * gamma / (24.0 * sigma * math.sqrt(2.0 * math.pi))


def estimation_distance_bound(zeta_star: float, gamma_star: float, sigma: float = 1.0) -> float:
    """Lower bound on the CDF gap between the truth and the hardest alternative.

    Even the best mixing distribution whose tail at gamma_star is half the
    truth's stays at least 0.01 * (gamma_star/sigma)**2 * zeta_star away in
    sup-norm (for gamma_star <= sigma), which is what makes the tail
    fraction estimable and not just detectable.
    """
    _check_zgs(zeta_star, gamma_star, sigma)
    return 0.01 * (gamma_star / sigma) ** 2 * zeta_star


def _check_zgs(zeta: float, gamma: float, sigma: float) -> None:
    if not (0.0 < zeta <= 1.0):
        raise ValueError(f"zeta must be in (0, 1], got {zeta}")
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ValueError(f"gamma must be positive and finite, got {gamma}")
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive and finite, got {sigma}")


def population_min_distance(
    model: ObservationModel,
    nu_star: MixingDistribution,
    zeta_cap: float,
    gamma: float,
    grid,
    t_points: int = 2000,
) -> float:
    """Smallest sup-distance from nu_star's mixture CDF achievable by any
    mixing distribution on `grid` whose tail mass above gamma is <= zeta_cap.

    This is the population (infinite-n) analogue of the fit statistic: it
    quantifies how far the data distribution must move before a tail below
    zeta_cap becomes consistent with it.  Evaluated on a dense grid of
    t_points CDF checkpoints spanning the atoms plus eight kernel scales.
    """
    if not (0.0 <= zeta_cap <= 1.0):
        raise ValueError(f"zeta_cap must be in [0, 1], got {zeta_cap}")
    points = np.asarray(getattr(grid, "points", grid), dtype=float)
    model.validate_means(points)
    model.validate_means(nu_star.support)
    if t_points < 2:
        raise ValueError("t_points must be >= 2")
    scale = model.sigma if model.family.value == "gaussian" else max(
        1.0, math.sqrt(float(nu_star.support[-1]))
    )
    lo = min(float(nu_star.support[0]), float(points[0])) - 8.0 * scale
    hi = max(float(nu_star.support[-1]), float(points[-1])) + 8.0 * scale
    ts = np.linspace(lo, hi, t_points)
    F_ref = np.asarray(mixture_cdf(model, nu_star, ts))
    K = kernel_cdf_grid(model, points, ts)

    g = points.size
    tail = (points > gamma).astype(float)
    rows = [
        np.hstack([K, -np.ones((t_points, 1))]),
        np.hstack([-K, -np.ones((t_points, 1))]),
        np.hstack([tail[None, :], np.zeros((1, 1))]),
        np.hstack([np.ones((1, g)), np.zeros((1, 1))]),
    ]
    rhs = np.concatenate([F_ref, -F_ref, [zeta_cap], [1.0]])
    relations = ("<=",) * (2 * t_points + 1) + ("==",)
    objective = np.zeros(g + 1)
    objective[g] = 1.0
    sol = lp.solve(lp.LinearProgram(objective, np.vstack(rows), relations, rhs))
    if sol.status != lp.OPTIMAL:
        raise NumericalError(f"population distance LP terminated with status {sol.status}")
    return max(float(sol.objective_value), 0.0)
