"""Observation families and mixtures over latent effect sizes.

Every hypothesis i carries a latent mean mu_i; its test statistic is drawn
from a known one-parameter kernel centered at that mean.  Three families are
supported: Gaussian with fixed scale, Poisson, and Binomial with a fixed
number of trials.  A mixing distribution is a finite discrete distribution
over means; mixing the kernel over it gives the marginal distribution of an
observation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special


class Family(enum.Enum):
    GAUSSIAN = "gaussian"
    POISSON = "poisson"
    BINOMIAL = "binomial"


class SupportKind(enum.Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"


@dataclass(frozen=True)
class ObservationModel:
    """Parametric kernel of an observation given its latent mean.

    sigma applies to the Gaussian family only; trials to the Binomial family
    only.  The latent mean of a Binomial observation is its success
    probability (not the expected count).
    """

    family: Family
    sigma: float = 1.0
    trials: int = 1

    def __post_init__(self) -> None:
        if self.family is Family.GAUSSIAN:
            if not (self.sigma > 0 and math.isfinite(self.sigma)):
                raise ValueError(f"sigma must be positive and finite, got {self.sigma}")
        if self.family is Family.BINOMIAL:
            if not (isinstance(self.trials, (int, np.integer)) and self.trials >= 1):
                raise ValueError(f"trials must be a positive integer, got {self.trials}")

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "ObservationModel":
        return cls(Family.GAUSSIAN, sigma=sigma)

    @classmethod
    def poisson(cls) -> "ObservationModel":
        return cls(Family.POISSON)

    @classmethod
    def binomial(cls, trials: int) -> "ObservationModel":
        return cls(Family.BINOMIAL, trials=trials)

    @property
    def support_kind(self) -> SupportKind:
        if self.family is Family.GAUSSIAN:
            return SupportKind.CONTINUOUS
        return SupportKind.INTEGER

    def mean_domain(self) -> tuple[float, float]:
        """Closure of the set of admissible latent means."""
        if self.family is Family.GAUSSIAN:
            return (-math.inf, math.inf)
        if self.family is Family.POISSON:
            return (0.0, math.inf)
        return (0.0, 1.0)

    def contains_mean(self, mu: float) -> bool:
        if not math.isfinite(mu):
            return False
        if self.family is Family.GAUSSIAN:
            return True
        if self.family is Family.POISSON:
            return mu > 0.0
        return 0.0 <= mu <= 1.0

    def validate_means(self, mus: np.ndarray) -> None:
        mus = np.asarray(mus, dtype=float)
        if mus.size and not all(self.contains_mean(m) for m in np.atleast_1d(mus)):
            raise ValueError(f"mean outside the {self.family.value} domain")


def kernel_cdf(model: ObservationModel, mu: float, t: float) -> float:
    """P(X <= t) for an observation with latent mean mu."""
    if not model.contains_mean(mu):
        raise ValueError(f"mean {mu} outside the {model.family.value} domain")
    return float(kernel_cdf_grid(model, np.array([mu]), np.array([float(t)]))[0, 0])


def kernel_cdf_grid(model: ObservationModel, mus: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Matrix of kernel CDF values, one row per t, one column per mean."""
    mus = np.asarray(mus, dtype=float)
    ts = np.asarray(ts, dtype=float)
    t_col = ts[:, None]
    if model.family is Family.GAUSSIAN:
        return special.ndtr((t_col - mus[None, :]) / model.sigma)
    k = np.floor(t_col)
    if model.family is Family.POISSON:
        out = np.zeros((ts.size, mus.size))
        ok = (k >= 0).ravel()
        if ok.any():
            # P(Pois(mu) <= k) is the regularized upper incomplete gamma Q(k+1, mu)
            out[ok, :] = special.gammaincc(k[ok] + 1.0, mus[None, :])
        return out
    T = model.trials
    out = np.zeros((ts.size, mus.size))
    full = (k >= T).ravel()
    out[full, :] = 1.0
    mid = ((k >= 0) & (k < T)).ravel()
    if mid.any():
        # P(Bin(T, p) <= k) = I_{1-p}(T-k, k+1)
        out[mid, :] = special.betainc(T - k[mid], k[mid] + 1.0, 1.0 - mus[None, :])
    return out


def kernel_pdf_grid(model: ObservationModel, mus: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Matrix of kernel densities (pmf for integer families): rows xs, cols mus."""
    mus = np.asarray(mus, dtype=float)
    xs = np.asarray(xs, dtype=float)
    x_col = xs[:, None]
    if model.family is Family.GAUSSIAN:
        z = (x_col - mus[None, :]) / model.sigma
        return np.exp(-0.5 * z * z) / (model.sigma * math.sqrt(2.0 * math.pi))
    k = np.round(x_col)
    if model.family is Family.POISSON:
        return np.exp(k * np.log(mus[None, :]) - mus[None, :] - special.gammaln(k + 1.0))
    T = model.trials
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = (
            special.gammaln(T + 1.0)
            - special.gammaln(k + 1.0)
            - special.gammaln(T - k + 1.0)
        )
        logp = logc + k * np.log(mus[None, :]) + (T - k) * np.log1p(-mus[None, :])
    out = np.exp(logp)
    # p in {0, 1} gives 0*log(0) above; the pmf is a point mass there
    zero_p = mus == 0.0
    one_p = mus == 1.0
    if zero_p.any():
        out[:, zero_p] = (k == 0).astype(float)
    if one_p.any():
        out[:, one_p] = (k == T).astype(float)
    return out


@dataclass(frozen=True)
class MixingDistribution:
    """Finite discrete distribution over latent means."""

    support: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        support = np.asarray(self.support, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)
        if support.ndim != 1 or weights.shape != support.shape:
            raise ValueError("support and weights must be 1-d arrays of equal length")
        if support.size == 0:
            raise ValueError("mixing distribution needs at least one atom")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {weights.sum()!r}")

    @classmethod
    def point(cls, x: float) -> "MixingDistribution":
        return cls(np.array([float(x)]), np.array([1.0]))

    @property
    def n_atoms(self) -> int:
        return int(self.support.size)


def mixture_cdf(model: ObservationModel, nu: MixingDistribution, t) -> np.ndarray | float:
    """CDF of an observation whose mean is drawn from nu.

    Accepts a scalar or an array of evaluation points; returns the same shape.
    """
    model.validate_means(nu.support)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    vals = kernel_cdf_grid(model, nu.support, ts) @ nu.weights
    if np.isscalar(t) or np.ndim(t) == 0:
        return float(vals[0])
    return vals


def mixture_tail(nu: MixingDistribution, gamma: float) -> float:
    """Mass nu places strictly above gamma."""
    return float(nu.weights[nu.support > gamma].sum())
