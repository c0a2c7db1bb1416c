"""Pilot-study and follow-up design calculators.

Closed-form planning rules for two-stage screens: how large an effect a
fixed measurement budget can certify, how many hypotheses the pilot itself
needs, how many replicates verify the pilot's discoveries, and how many
hypotheses the tail estimator needs before it detects or accurately
estimates a two-spike signal.  All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def _check_prob(name: str, value: float) -> None:
    if not (0.0 < value < 1.0):
        raise ValueError(f"{name} must be in (0, 1), got {value}")


def _check_frac(name: str, value: float) -> None:
    if not (0.0 < value <= 1.0):
        raise ValueError(f"{name} must be in (0, 1], got {value}")


def _check_pos(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value}")


def min_detectable_effect(budget: float, zeta: float, delta: float) -> float:
    """Smallest effect size a pilot of `budget` total measurements can flag.

    With a fraction zeta of hypotheses carrying the effect and failure
    probability delta, effects below 4*sqrt(log(2/delta) / (zeta**2 * budget))
    are indistinguishable from noise at this budget.
    """
    _check_pos("budget", budget)
    _check_frac("zeta", zeta)
    _check_prob("delta", delta)
    return 4.0 * math.sqrt(math.log(2.0 / delta) / (zeta * zeta * budget))


def min_pilot_hypotheses(zeta: float, delta: float) -> int:
    """Fewest pilot hypotheses for the detectable-effect guarantee to bind."""
    _check_frac("zeta", zeta)
    _check_prob("delta", delta)
    return math.ceil(4.0 * math.log(2.0 / delta) / (zeta * zeta))


def followup_replicates(n: float, gamma: float, zeta_hat: float) -> int:
    """Replicates per hypothesis for the follow-up stage to confirm effects.

    ceil(gamma**-2 * ln(n) * ln(1/zeta_hat)): larger screens and rarer
    estimated tails demand more replication; stronger effects less.
    """
    if not (n > 1):
        raise ValueError(f"n must exceed 1, got {n}")
    _check_pos("gamma", gamma)
    if not (0.0 < zeta_hat <= 1.0):
        raise ValueError(f"zeta_hat must be in (0, 1], got {zeta_hat}")
    return math.ceil(math.log(n) * math.log(1.0 / zeta_hat) / (gamma * gamma))


def detection_sample_complexity(
    zeta: float, gamma: float, sigma: float, delta: float
) -> int:
    """Hypotheses needed before the tail estimator sees a two-spike signal.

    Exact form: ceil(2*log(2/delta) / (zeta * (Phi_sigma(gamma/2) -
    Phi_sigma(-gamma/2)))**2) with Phi_sigma the kernel CDF.  At this n the
    estimate of the mass above zero is positive with probability >= 1-delta.
    """
    _check_frac("zeta", zeta)
    _check_pos("gamma", gamma)
    _check_pos("sigma", sigma)
    _check_prob("delta", delta)
    from .oracles import detection_distance_bound

    gap = detection_distance_bound(zeta, gamma, sigma)
    return math.ceil(2.0 * math.log(2.0 / delta) / (gap * gap))


def detection_sample_complexity_small_gamma(
    zeta: float, gamma: float, sigma: float, delta: float
) -> int:
    """First-order version of detection_sample_complexity for gamma < sigma:
    ceil(16 * sigma**2 * log(2/delta) / (zeta**2 * gamma**2))."""
    _check_frac("zeta", zeta)
    _check_pos("gamma", gamma)
    _check_pos("sigma", sigma)
    _check_prob("delta", delta)
    return math.ceil(
        16.0 * sigma * sigma * math.log(2.0 / delta) / (zeta * zeta * gamma * gamma)
    )


def estimation_sample_complexity(
    zeta_star: float, gamma_star: float, sigma: float, alpha: float, delta: float
) -> int:
    """Hypotheses needed to estimate the two-spike tail within a factor of 2.

    ceil(log(4/(alpha*delta)) / (0.01 * (gamma_star/sigma)**2 * zeta_star)**2),
    requiring gamma_star <= sigma (the separation bound behind it is a
    small-effect result).
    """
    _check_frac("zeta_star", zeta_star)
    _check_pos("gamma_star", gamma_star)
    _check_pos("sigma", sigma)
    _check_prob("alpha", alpha)
    _check_prob("delta", delta)
    if gamma_star > sigma:
        raise ValueError(
            f"gamma_star must not exceed sigma, got {gamma_star} > {sigma}"
        )
    from .oracles import estimation_distance_bound

    gap = estimation_distance_bound(zeta_star, gamma_star, sigma)
    return math.ceil(math.log(4.0 / (alpha * delta)) / (gap * gap))


@dataclass(frozen=True)
class PilotPlan:
    """What a measurement budget buys at the pilot stage.

    budget is the usable total m*t after rounding replicates down to an
    integer; min_detectable_gamma is the effect threshold that budget can
    certify.  An infeasible plan (budget below the hypothesis floor) keeps
    the requested budget and zero replicates.
    """

    budget: float
    hypotheses: int
    replicates: int
    zeta: float
    delta: float
    min_detectable_gamma: float
    feasible: bool


def plan_pilot(budget: float, zeta: float, delta: float) -> PilotPlan:
    """Feasibility summary for a pilot with `budget` total measurements."""
    _check_pos("budget", budget)
    hypotheses = min_pilot_hypotheses(zeta, delta)
    replicates = int(budget // hypotheses)
    feasible = replicates >= 1
    usable = float(hypotheses * replicates) if feasible else float(budget)
    return PilotPlan(
        budget=usable,
        hypotheses=hypotheses,
        replicates=replicates,
        zeta=zeta,
        delta=delta,
        min_detectable_gamma=min_detectable_effect(usable, zeta, delta),
        feasible=feasible,
    )
