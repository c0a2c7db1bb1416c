"""Conservative lower confidence bounds on latent tail fractions.

Given n observations, each drawn from a known kernel around an unknown
latent mean, the estimate of the fraction of means strictly above gamma is
the smallest tail mass among all discrete mixing distributions whose mixture
CDF stays inside a width-tau uniform confidence band around the empirical
CDF.  With tau the DKW band width at level alpha, the estimate never exceeds
the true fraction, simultaneously for every gamma, with probability at
least 1 - alpha.

Two routes compute it: a single linear program over mixture weights on a
mean grid (`estimate_zeta`), and bisection over candidate tail levels of a
goodness-of-fit statistic (`estimate_zeta_bisect`).  Both constrain the same
discretized band, so they agree to within one empirical-CDF step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .ecdf import ConstraintPoints, EmpiricalCdf, constraint_points, dkw_threshold, sup_distance
from .errors import ModelMisfitError, NumericalError
from .kernels import Family, MixingDistribution, ObservationModel, kernel_cdf_grid

_DIRECT = "direct_lp"
_BISECT = "bisect"

# lower edge for Poisson mean grids; the mean domain is open at zero
_POISSON_MIN_MEAN = 1e-8


@dataclass(frozen=True)
class EstimatorConfig:
    """Discretization and method knobs for the tail estimator."""

    alpha: float = 0.05
    grid_points: int = 200
    grid_pad: float = 3.0
    max_constraint_points: int = 1024
    method: str = _DIRECT

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.grid_points < 3:
            raise ValueError(f"grid_points must be >= 3, got {self.grid_points}")
        if self.grid_pad < 0:
            raise ValueError(f"grid_pad must be >= 0, got {self.grid_pad}")
        if self.max_constraint_points < 1:
            raise ValueError(
                f"max_constraint_points must be >= 1, got {self.max_constraint_points}"
            )
        if self.method not in (_DIRECT, _BISECT):
            raise ValueError(f"method must be {_DIRECT!r} or {_BISECT!r}, got {self.method!r}")


@dataclass(frozen=True)
class MeanGrid:
    """Candidate support for the fitted mixing distribution."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", points)
        if points.ndim != 1 or points.size < 1:
            raise ValueError("grid needs at least one point")
        if np.any(np.diff(points) <= 0):
            raise ValueError("grid points must be strictly increasing")

    @property
    def size(self) -> int:
        return int(self.points.size)


def _validate_gamma(model: ObservationModel, gamma: float) -> None:
    lo, hi = model.mean_domain()
    if not (math.isfinite(gamma) and lo <= gamma <= hi):
        raise ValueError(f"gamma {gamma} outside the {model.family.value} mean domain")


def _build_grid(
    model: ObservationModel, ecdf: EmpiricalCdf, inserts, cfg: EstimatorConfig
) -> MeanGrid:
    if model.family is Family.BINOMIAL:
        base = np.linspace(0.0, 1.0, cfg.grid_points)
    else:
        lo = float(ecdf.samples[0])
        hi = float(ecdf.samples[-1])
        if model.family is Family.GAUSSIAN:
            scale = model.sigma
        else:
            scale = math.sqrt(max(hi, 1.0))
        lo -= cfg.grid_pad * scale
        hi += cfg.grid_pad * scale
        if model.family is Family.POISSON:
            lo = max(lo, _POISSON_MIN_MEAN)
            hi = max(hi, 1.0)
        base = np.linspace(lo, hi, cfg.grid_points)
    wanted = [x for x in inserts if model.contains_mean(x)]
    if model.family is Family.GAUSSIAN:
        wanted.append(0.0)
    if not wanted:
        return MeanGrid(np.unique(base))
    wanted_arr = np.unique(np.asarray(wanted, dtype=float))
    span = max(base[-1] - base[0], 1.0)
    # drop base points that would collide with an exact insert
    near = np.min(np.abs(base[:, None] - wanted_arr[None, :]), axis=1) < 1e-9 * span
    return MeanGrid(np.sort(np.concatenate([base[~near], wanted_arr])))


def make_grid(
    model: ObservationModel,
    ecdf: EmpiricalCdf,
    gamma: float,
    cfg: EstimatorConfig | None = None,
) -> MeanGrid:
    """Uniform mean grid over the padded sample range with gamma (and zero,
    when the domain allows) inserted exactly."""
    cfg = cfg or EstimatorConfig()
    _validate_gamma(model, gamma)
    return _build_grid(model, ecdf, [gamma], cfg)


@dataclass(frozen=True)
class ZetaEstimate:
    """One conservative tail-fraction estimate with its diagnostics.

    residual is the exact sup-distance between the empirical CDF and the
    minimizing mixture (None when the band was vacuous and nothing was
    fitted); status is "optimal" or "vacuous".
    """

    gamma: float
    zeta_hat: float
    alpha: float
    tau: float
    n: int
    method: str
    status: str
    residual: float | None


@dataclass(frozen=True)
class EstimateCurve:
    """Estimates across a sweep of thresholds, sharing one sample and alpha."""

    entries: tuple[ZetaEstimate, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ValueError("curve needs at least one entry")
        if len({e.alpha for e in self.entries}) != 1:
            raise ValueError("curve entries must share alpha")

    def gammas(self) -> np.ndarray:
        return np.array([e.gamma for e in self.entries])

    def zeta_hats(self) -> np.ndarray:
        return np.array([e.zeta_hat for e in self.entries])

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


class _Workspace:
    """Shared pieces of the band-constrained LPs for one (sample, grid) pair."""

    def __init__(
        self,
        ecdf: EmpiricalCdf,
        model: ObservationModel,
        grid: MeanGrid,
        cfg: EstimatorConfig,
    ) -> None:
        self.ecdf = ecdf
        self.model = model
        self.grid = grid
        self.cpts: ConstraintPoints = constraint_points(ecdf, model, cfg.max_constraint_points)
        self.K = kernel_cdf_grid(model, grid.points, self.cpts.points)

    def tail_indicator(self, gamma: float) -> np.ndarray:
        return (self.grid.points > gamma).astype(float)

    def mixing(self, weights: np.ndarray) -> MixingDistribution:
        w = np.clip(weights, 0.0, None)
        total = w.sum()
        if total <= 0:
            raise NumericalError("fitted mixture has no mass")
        return MixingDistribution(self.grid.points, w / total)


def _direct_lp(ws: _Workspace, gamma: float, tau: float) -> tuple[float, MixingDistribution]:
    """min tail mass over mixtures inside the width-tau band."""
    hi = ws.cpts.upper_env + tau
    lo = ws.cpts.lower_env - tau
    keep_hi = hi < 1.0 - 1e-12
    keep_lo = lo > 1e-12
    g = ws.grid.size
    A = np.vstack([ws.K[keep_hi], -ws.K[keep_lo], np.ones(g)])
    b = np.concatenate([hi[keep_hi], -lo[keep_lo], [1.0]])
    relations = ("<=",) * (A.shape[0] - 1) + ("==",)
    sol = lp.solve(lp.LinearProgram(ws.tail_indicator(gamma), A, relations, b))
    if sol.status == lp.INFEASIBLE:
        gap, _ = _statistic_lp(ws, gamma, None)
        raise ModelMisfitError(
            f"no mixture of the observation model fits the sample within the band "
            f"(best sup-distance {gap:.6f} > half-width {tau:.6f})"
        )
    if sol.status != lp.OPTIMAL:
        raise NumericalError(f"tail LP terminated with status {sol.status}")
    zeta = min(max(float(sol.objective_value), 0.0), 1.0)
    return zeta, ws.mixing(sol.x)


def _statistic_lp(
    ws: _Workspace, gamma: float, zeta: float | None
) -> tuple[float, MixingDistribution]:
    """min envelope violation s over mixtures with tail mass <= zeta.

    zeta=None drops the tail cap (the unconstrained goodness of fit).
    """
    keep_hi = ws.cpts.upper_env < 1.0 - 1e-12
    keep_lo = ws.cpts.lower_env > 1e-12
    g = ws.grid.size
    n_hi = int(keep_hi.sum())
    n_lo = int(keep_lo.sum())
    rows = [
        np.hstack([ws.K[keep_hi], -np.ones((n_hi, 1))]),
        np.hstack([-ws.K[keep_lo], -np.ones((n_lo, 1))]),
    ]
    rhs = [ws.cpts.upper_env[keep_hi], -ws.cpts.lower_env[keep_lo]]
    relations = ["<="] * (n_hi + n_lo)
    if zeta is not None and zeta < 1.0:
        rows.append(np.hstack([ws.tail_indicator(gamma)[None, :], np.zeros((1, 1))]))
        rhs.append(np.array([zeta]))
        relations.append("<=")
    rows.append(np.hstack([np.ones((1, g)), np.zeros((1, 1))]))
    rhs.append(np.array([1.0]))
    relations.append("==")
    objective = np.zeros(g + 1)
    objective[g] = 1.0
    sol = lp.solve(
        lp.LinearProgram(objective, np.vstack(rows), tuple(relations), np.concatenate(rhs))
    )
    if sol.status != lp.OPTIMAL:
        raise NumericalError(f"statistic LP terminated with status {sol.status}")
    return max(float(sol.objective_value), 0.0), ws.mixing(sol.x[:g])


def _vacuous_estimate(
    gamma: float, alpha: float, tau: float, n: int, method: str
) -> ZetaEstimate:
    return ZetaEstimate(gamma, 0.0, alpha, tau, n, method, "vacuous", None)


def estimate_zeta(
    ecdf: EmpiricalCdf,
    model: ObservationModel,
    gamma: float,
    cfg: EstimatorConfig | None = None,
    *,
    grid: MeanGrid | None = None,
) -> ZetaEstimate:
    """Conservative estimate of the latent-mean mass strictly above gamma."""
    cfg = cfg or EstimatorConfig()
    _validate_gamma(model, gamma)
    tau = dkw_threshold(cfg.alpha, ecdf.n)
    if tau >= 1.0:
        # the band covers [0, 1] everywhere; a point mass at gamma fits
        return _vacuous_estimate(gamma, cfg.alpha, tau, ecdf.n, _DIRECT)
    if grid is None:
        grid = make_grid(model, ecdf, gamma, cfg)
    ws = _Workspace(ecdf, model, grid, cfg)
    zeta, nu_hat = _direct_lp(ws, gamma, tau)
    residual = sup_distance(ecdf, model, nu_hat)
    return ZetaEstimate(gamma, zeta, cfg.alpha, tau, ecdf.n, _DIRECT, "optimal", residual)


def test_statistic(
    ecdf: EmpiricalCdf,
    model: ObservationModel,
    gamma: float,
    zeta: float,
    cfg: EstimatorConfig | None = None,
    *,
    grid: MeanGrid | None = None,
) -> float:
    """Best achievable envelope violation among mixtures with tail <= zeta."""
    cfg = cfg or EstimatorConfig()
    _validate_gamma(model, gamma)
    if not (0.0 <= zeta <= 1.0):
        raise ValueError(f"zeta must be in [0, 1], got {zeta}")
    if grid is None:
        grid = make_grid(model, ecdf, gamma, cfg)
    ws = _Workspace(ecdf, model, grid, cfg)
    value, _ = _statistic_lp(ws, gamma, zeta)
    return value


def estimate_zeta_bisect(
    ecdf: EmpiricalCdf,
    model: ObservationModel,
    gamma: float,
    cfg: EstimatorConfig | None = None,
    *,
    grid: MeanGrid | None = None,
) -> ZetaEstimate:
    """Same bound as estimate_zeta, found by bisecting the fit statistic.

    Returns the largest multiple i/n of 1/n at which mixtures capped at tail
    mass i/n still miss the band, i.e. the band rejects every mixture with a
    smaller tail.
    """
    cfg = cfg or EstimatorConfig()
    _validate_gamma(model, gamma)
    n = ecdf.n
    tau = dkw_threshold(cfg.alpha, n)
    if tau >= 1.0:
        return _vacuous_estimate(gamma, cfg.alpha, tau, n, _BISECT)
    if grid is None:
        grid = make_grid(model, ecdf, gamma, cfg)
    ws = _Workspace(ecdf, model, grid, cfg)
    gap, witness = _statistic_lp(ws, gamma, None)
    if gap > tau:
        raise ModelMisfitError(
            f"no mixture of the observation model fits the sample within the band "
            f"(best sup-distance {gap:.6f} > half-width {tau:.6f})"
        )
    i_min, i_max = 0, n
    while i_max - i_min > 1:
        i_avg = (i_min + i_max) // 2
        value, nu = _statistic_lp(ws, gamma, i_avg / n)
        if value > tau:
            i_min = i_avg
        else:
            i_max = i_avg
            witness = nu
    residual = sup_distance(ecdf, model, witness)
    return ZetaEstimate(gamma, i_min / n, cfg.alpha, tau, n, _BISECT, "optimal", residual)


def estimate_curve(
    ecdf: EmpiricalCdf,
    model: ObservationModel,
    gammas,
    cfg: EstimatorConfig | None = None,
) -> EstimateCurve:
    """Estimates over an increasing sweep of thresholds.

    All thresholds share one mean grid containing every query point, which
    makes the curve's monotonicity structural: raising gamma only shrinks
    the objective over the identical feasible set.
    """
    cfg = cfg or EstimatorConfig()
    gammas = np.asarray(gammas, dtype=float)
    if gammas.ndim != 1 or gammas.size == 0:
        raise ValueError("need at least one gamma")
    if np.any(np.diff(gammas) <= 0):
        raise ValueError("gammas must be strictly increasing")
    for gamma in gammas:
        _validate_gamma(model, float(gamma))
    grid = _build_grid(model, ecdf, list(gammas), cfg)
    estimate = estimate_zeta_bisect if cfg.method == _BISECT else estimate_zeta
    entries = [estimate(ecdf, model, float(g), cfg, grid=grid) for g in gammas]
    return EstimateCurve(tuple(entries))
