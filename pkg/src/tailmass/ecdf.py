"""Empirical CDF machinery: DKW band widths, exact sup-distance, envelopes.

The estimator never needs the empirical CDF on a continuum: against a
mixture CDF that is continuous, the sup-distance is attained at a sample
jump (approaching from either side); against an integer-supported mixture
both CDFs are step functions on the integers.  `sup_distance` evaluates the
exact supremum that way, and `constraint_points` exports the (possibly
coarsened) jump envelope the estimator's linear programs constrain against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import (
    MixingDistribution,
    ObservationModel,
    SupportKind,
    kernel_cdf_grid,
    mixture_cdf,
)

# Integer-support mixtures are truncated where the remaining kernel mass drops below this.
_TAIL_MASS_EPS = 1e-12


@dataclass(frozen=True)
class EmpiricalCdf:
    """Empirical CDF of a sample, stored sorted."""

    samples: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("need a nonempty 1-d sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples = np.sort(samples)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalCdf":
        return cls(np.asarray(samples, dtype=float))

    @property
    def n(self) -> int:
        return int(self.samples.size)

    def evaluate(self, t) -> np.ndarray | float:
        """F_hat(t) = fraction of samples <= t (right-continuous)."""
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        vals = np.searchsorted(self.samples, ts, side="right") / self.n
        if np.isscalar(t) or np.ndim(t) == 0:
            return float(vals[0])
        return vals

    def jump_points(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Unique sample values with the ECDF's left limits and right values."""
        points, counts = np.unique(self.samples, return_counts=True)
        right = np.cumsum(counts) / self.n
        left = right - counts / self.n
        return points, left, right


def dkw_threshold(alpha: float, n: int) -> float:
    """Width of the level-(1-alpha) uniform confidence band for the ECDF."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"n must be a positive integer, got {n}")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def _integer_eval_points(ecdf: EmpiricalCdf, model: ObservationModel, nu: MixingDistribution) -> np.ndarray:
    """Integer grid on which both step CDFs must be compared."""
    lo = int(math.floor(ecdf.samples[0])) - 1
    hi = int(math.ceil(ecdf.samples[-1]))
    mu_max = float(nu.support[-1])
    # extend until the mixture's remaining mass above hi is negligible
    k = hi
    ceiling = model.trials if model.family.value == "binomial" else None
    while True:
        if ceiling is not None and k >= ceiling:
            k = ceiling
            break
        top = kernel_cdf_grid(model, np.array([mu_max]), np.array([float(k)]))[0, 0]
        if 1.0 - top <= _TAIL_MASS_EPS:
            break
        k = k + max(1, k - hi + 1)  # geometric-ish extension
    return np.arange(lo, k + 1, dtype=float)


def sup_distance(ecdf: EmpiricalCdf, model: ObservationModel, nu: MixingDistribution) -> float:
    """Exact sup-norm distance between the ECDF and a mixture CDF."""
    model.validate_means(nu.support)
    if model.support_kind is SupportKind.CONTINUOUS:
        points, left, right = ecdf.jump_points()
        F = np.asarray(mixture_cdf(model, nu, points))
        return float(np.maximum(np.abs(F - left), np.abs(F - right)).max())
    ts = _integer_eval_points(ecdf, model, nu)
    F = np.asarray(mixture_cdf(model, nu, ts))
    Fhat = np.asarray(ecdf.evaluate(ts))
    return float(np.abs(F - Fhat).max())


@dataclass(frozen=True)
class ConstraintPoints:
    """Evaluation points with ECDF envelopes used as LP constraints.

    At each point, lower_env is the ECDF's left limit at the start of the
    stretch the point represents and upper_env its right value at the point
    itself, so [lower_env, upper_env] covers the ECDF over the whole stretch.
    Coarsening therefore only widens the feasible set, never shrinks it.
    """

    points: np.ndarray = field(repr=False)
    lower_env: np.ndarray = field(repr=False)
    upper_env: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for name in ("points", "lower_env", "upper_env"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.points.shape == self.lower_env.shape == self.upper_env.shape):
            raise ValueError("mismatched constraint arrays")
        if np.any(np.diff(self.points) <= 0):
            raise ValueError("points must be strictly increasing")
        if np.any(self.lower_env > self.upper_env):
            raise ValueError("lower envelope above upper envelope")

    @property
    def size(self) -> int:
        return int(self.points.size)


def constraint_points(ecdf: EmpiricalCdf, model: ObservationModel, max_points: int) -> ConstraintPoints:
    """Jump-point envelopes, coarsened by sample-mass quantiles past max_points."""
    if max_points < 1:
        raise ValueError(f"max_points must be >= 1, got {max_points}")
    points, left, right = ecdf.jump_points()
    k = points.size
    if k <= max_points:
        return ConstraintPoints(points, left, right)
    counts = np.round(right * ecdf.n).astype(int)
    # group boundaries at equally spaced cumulative counts; groups nest when
    # max_points halves, preserving the coarsening monotonicity property
    targets = ecdf.n * (np.arange(max_points) + 1) / max_points
    idx = np.searchsorted(counts, targets - 1e-9)
    idx = np.unique(np.minimum(idx, k - 1))
    starts = np.concatenate(([0], idx[:-1] + 1))
    return ConstraintPoints(points[idx], left[starts], right[idx])
