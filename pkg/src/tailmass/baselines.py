"""Reference procedures the band-constrained estimator is compared against.

`fwer_count` is the classical Bonferroni-corrected discovery fraction: it
counts observations exceeding a family-wise critical value for the null that
every latent mean sits at the threshold.  `npmle_fit` is the nonparametric
maximum-likelihood mixing distribution on a fixed mean grid, fitted by EM;
`plugin_zeta` reads tail masses straight off a fitted mixture.  Neither
baseline carries the simultaneous conservativeness guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .ecdf import EmpiricalCdf
from .errors import NumericalError
from .estimator import EstimatorConfig, _build_grid
from .kernels import (
    Family,
    MixingDistribution,
    ObservationModel,
    kernel_cdf,
    kernel_pdf_grid,
    mixture_tail,
)


def _kernel_quantile(model: ObservationModel, mu: float, q: float) -> float:
    """Smallest t with kernel CDF(t) >= q; integer families return integers."""
    if model.family is Family.GAUSSIAN:
        return mu + model.sigma * float(special.ndtri(q))
    if model.family is Family.BINOMIAL:
        lo, hi = -1, model.trials
    else:
        hi = 1
        while kernel_cdf(model, mu, hi) < q:
            hi *= 2
        lo = -1
    # smallest integer k in (lo, hi] with CDF(k) >= q
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if kernel_cdf(model, mu, mid) >= q:
            hi = mid
        else:
            lo = mid
    return float(hi)


def fwer_count(ecdf: EmpiricalCdf, model: ObservationModel, gamma: float, alpha: float) -> float:
    """Fraction of observations above the Bonferroni critical value.

    The critical value is the (1 - alpha/n) kernel quantile centered at
    gamma; observations exactly at the cutoff are not counted.  Controls the
    family-wise error of claiming any mean above gamma, at the price of
    missing all but the strongest effects.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if not model.contains_mean(gamma):
        raise ValueError(f"gamma {gamma} outside the {model.family.value} mean domain")
    n = ecdf.n
    critical = _kernel_quantile(model, gamma, 1.0 - alpha / n)
    return float(np.count_nonzero(ecdf.samples > critical)) / n


@dataclass(frozen=True)
class NpmleConfig:
    grid_points: int = 200
    max_iterations: int = 2000
    tolerance: float = 1e-8

    def __post_init__(self) -> None:
        if self.grid_points < 2:
            raise ValueError(f"grid_points must be >= 2, got {self.grid_points}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not (self.tolerance > 0):
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")


def npmle_fit(
    ecdf: EmpiricalCdf,
    model: ObservationModel,
    cfg: NpmleConfig | None = None,
    *,
    history: list[float] | None = None,
) -> MixingDistribution:
    """Maximum-likelihood mixing distribution on a fixed mean grid, via EM.

    Starts from uniform weights and iterates the multiplicative fixed-point
    update until the average log-likelihood moves by less than the tolerance
    or the iteration cap is hit.  If `history` is given, the average
    log-likelihood after each iteration is appended to it (it never
    decreases).
    """
    cfg = cfg or NpmleConfig()
    grid = _build_grid(
        model, ecdf, [], EstimatorConfig(grid_points=cfg.grid_points)
    )
    values, counts = np.unique(ecdf.samples, return_counts=True)
    weights_n = counts / ecdf.n
    P = kernel_pdf_grid(model, grid.points, values)  # (n_unique, g)
    if np.any(P.sum(axis=1) <= 0.0):
        raise NumericalError("a sample has zero likelihood under every grid mean")
    w = np.full(grid.size, 1.0 / grid.size)
    last = -math.inf
    for _ in range(cfg.max_iterations):
        denom = P @ w
        if np.any(denom <= 0.0):
            raise NumericalError("zero mixture likelihood during EM")
        # multiplicative update: w_j <- w_j * E_n[ f_j(X) / f_w(X) ]
        w = w * ((weights_n / denom) @ P)
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        loglik = float(weights_n @ np.log(P @ w))
        if history is not None:
            history.append(loglik)
        if loglik - last < cfg.tolerance:
            break
        last = loglik
    return MixingDistribution(grid.points, w)


def plugin_zeta(nu: MixingDistribution, gamma: float) -> float:
    """Tail mass of a fitted mixing distribution above gamma (no guarantee)."""
    return mixture_tail(nu, gamma)
