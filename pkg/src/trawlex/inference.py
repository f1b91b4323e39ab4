"""
Pairwise likelihood inference for the latent trawl exceedance model.

Each pair ``(x_i, x_j)`` contributes one of four closed-form densities,
obtained by differentiating the three-slice Laplace transform

    L(u1, u2) = (1 + u1/β)^-b0 (1 + (u1+u2)/β)^-b0h (1 + u2/β)^-b0

where ``b0`` and ``b0h`` are the Gamma shapes of ``A_0 \\ A_h`` and
``A_0 ∩ A_h``.  The densities are taken with respect to
``δ_0(dx) + dx`` in each coordinate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .gpd import to_xi_sigma, gpd_quantile
from .model import (
    MT,
    ORIGINAL,
    ExceedanceSeries,
    ModelParams,
    exceedance_prob,
    inverse_transform_mt,
    kappa_for_prob,
    mt_log_jacobian,
    slice_shapes,
)
from .trawl import joint_laplace

__all__ = [
    "PLConfig",
    "FitResult",
    "PairwiseLikelihood",
    "NonPositiveDensityError",
    "SingularHessianError",
    "pair_density_00",
    "pair_density_10",
    "pair_density_01",
    "pair_density_11",
    "pair_density_mt",
    "pair_density",
    "log_pairwise_likelihood",
    "fit",
    "sandwich_covariance",
    "numerical_hessian",
    "full_likelihood_small_k",
    "init_heuristic",
]


class NonPositiveDensityError(ValueError):
    """A pair density evaluated to a nonpositive or non-finite value."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class SingularHessianError(np.linalg.LinAlgError):
    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


@dataclass
class PLConfig:
    """Settings for pairwise-likelihood fitting.

    ``delta`` bounds the index separation of the pairs.  Positive parameters
    are optimised on the log scale; ``xi`` is left untransformed.
    """

    delta: int = 4
    simplex_maxiter: int = 4000
    simplex_xatol: float = 1e-7
    simplex_fatol: float = 1e-12
    polish_gtol: float = 1e-5
    polish_maxiter: int = 200
    fd_step: float = 1e-5
    block_length: Optional[int] = None
    kappa_floor: float = 1e-4
    rho_bounds: tuple = (1e-3, 10.0)
    acf_lags: int = 10

    def __post_init__(self):
        if int(self.delta) != self.delta or self.delta < 1:
            raise ValueError("delta must be an integer >= 1")
        self.delta = int(self.delta)


# --- pair densities ------------------------------------------------------------


def _log_f00(b0, b0h, alpha, beta, kappa):
    l1 = np.log1p(kappa / beta)
    l2 = np.log1p(2 * kappa / beta)
    p = np.exp(-alpha * l1)
    both = np.exp(-2 * b0 * l1 - b0h * l2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(1 - 2 * p + both)


def _log_f10(x, b0, b0h, alpha, beta, kappa):
    la = np.log1p((kappa + x) / beta)
    lc = np.log1p((2 * kappa + x) / beta)
    l1 = np.log1p(kappa / beta)
    a = np.exp(la)
    # ratio of the joint term to the marginal term, in (0, 1)
    log_r = b0h * (la - lc) - b0 * l1 + np.log(a + b0 * kappa / (alpha * beta)) - lc
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(alpha / beta) - (alpha + 1) * la + np.log1p(-np.exp(log_r))


def _log_f11(x1, x2, b0, b0h, alpha, beta, kappa):
    # order the arguments so the result is exactly symmetric in floating point
    x1, x2 = np.minimum(x1, x2), np.maximum(x1, x2)
    la = np.log1p((kappa + x1) / beta)
    ld = np.log1p((kappa + x2) / beta)
    lc = np.log1p((2 * kappa + x1 + x2) / beta)
    a, c, d = np.exp(la), np.exp(lc), np.exp(ld)
    bracket = b0 * b0h * c * d + b0 * b0 * c * c + (b0h * b0h + b0h) * a * d + b0h * b0 * a * c
    with np.errstate(divide="ignore"):
        return -2 * np.log(beta) - (b0 + 1) * (la + ld) - (b0h + 2) * lc + np.log(bracket)


def _latent(params: ModelParams, x):
    """Map observations to the latent scale; returns (x_latent, log_jacobian)."""
    if params.variant == ORIGINAL:
        return np.asarray(x, dtype=float), 0.0
    xl = inverse_transform_mt(x, params.kappa, params.xi, params.sigma)
    return xl, mt_log_jacobian(x, params.kappa, params.xi, params.sigma)


def _pos(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError(f"{name} must be strictly positive")
    return x


def _scalar(v):
    return v if np.ndim(v) else float(v)


def pair_density_00(params: ModelParams, h):
    """``P(X_0 = 0, X_h = 0)``."""
    b0, b0h = slice_shapes(params, h)
    return _scalar(np.exp(_log_f00(b0, b0h, params.alpha, params.beta, params.kappa)))


def pair_density_10(params: ModelParams, h, x1):
    """Density of ``X_0 = x1 > 0`` jointly with ``X_h = 0``."""
    x1 = _pos(x1, "x1")
    b0, b0h = slice_shapes(params, h)
    xl, lj = _latent(params, x1)
    out = np.exp(_log_f10(xl, b0, b0h, params.alpha, params.beta, params.kappa) + lj)
    return _scalar(out)


def pair_density_01(params: ModelParams, h, x2):
    """Density of ``X_0 = 0`` jointly with ``X_h = x2 > 0`` (equal to the 10 case)."""
    return pair_density_10(params, h, x2)


def pair_density_11(params: ModelParams, h, x1, x2):
    """Joint density of two positive values at lag ``h``."""
    x1, x2 = _pos(x1, "x1"), _pos(x2, "x2")
    b0, b0h = slice_shapes(params, h)
    x1l, lj1 = _latent(params, x1)
    x2l, lj2 = _latent(params, x2)
    out = np.exp(_log_f11(x1l, x2l, b0, b0h, params.alpha, params.beta, params.kappa) + (lj1 + lj2))
    return _scalar(out)


def pair_density(params: ModelParams, h, x1, x2):
    """Pair density dispatching on the zero/positive pattern (scalar inputs)."""
    if x1 < 0 or x2 < 0:
        raise ValueError("observations must be nonnegative")
    if x1 == 0 and x2 == 0:
        return pair_density_00(params, h)
    if x2 == 0:
        return pair_density_10(params, h, x1)
    if x1 == 0:
        return pair_density_01(params, h, x2)
    return pair_density_11(params, h, x1, x2)


def pair_density_mt(params: ModelParams, h, z1, z2):
    """MT pair density at ``(z1, z2)``; zeros are the atom."""
    if params.variant != MT:
        raise ValueError("pair_density_mt needs MT parameters")
    return pair_density(params, h, z1, z2)


# --- pairwise likelihood -----------------------------------------------------------


def _pairs(series: ExceedanceSeries, delta: int):
    idx = series.index
    k = series.k
    first, second = [], []
    for o in range(1, delta + 1):
        i = np.arange(k - o)
        j = i + o
        ok = idx[j] - idx[i] <= delta
        first.append(i[ok])
        second.append(j[ok])
    first = np.concatenate(first) if first else np.zeros(0, int)
    second = np.concatenate(second) if second else np.zeros(0, int)
    order = np.lexsort((second, first))
    return first[order], second[order]


class PairwiseLikelihood:
    """Precomputed pair structure of a series for repeated likelihood evaluation.

    Pairs are ordered by ``(i, j)``.  Both-zero pairs are aggregated by lag,
    so evaluation cost scales with the number of pairs holding an exceedance.
    """

    def __init__(self, series: ExceedanceSeries, delta: int = 4):
        if series.k < 2:
            raise ValueError("need at least two observations")
        self.series = series
        self.delta = int(delta)
        self.first, self.second = _pairs(series, self.delta)
        if len(self.first) == 0:
            raise ValueError("no admissible pairs at this separation")
        t, v = series.times, series.values
        lags = t[self.second] - t[self.first]
        self.lags, self.lag_id = np.unique(lags, return_inverse=True)
        pos = v > 0
        self.case = 2 * pos[self.first].astype(int) + pos[self.second].astype(int)
        self.n_pairs = len(self.first)
        self.pos_obs = np.flatnonzero(pos)
        # positive observation -> slot in pos_obs
        slot = np.full(series.k, -1)
        slot[self.pos_obs] = np.arange(len(self.pos_obs))
        m00 = self.case == 0
        self.count00 = np.bincount(self.lag_id[m00], minlength=len(self.lags))
        m10 = (self.case == 2) | (self.case == 1)
        self.one_lag = self.lag_id[m10]
        self.one_slot = np.where(self.case[m10] == 2, slot[self.first[m10]], slot[self.second[m10]])
        m11 = self.case == 3
        self.two_lag = self.lag_id[m11]
        self.two_slot1 = slot[self.first[m11]]
        self.two_slot2 = slot[self.second[m11]]
        self._masks = (m00, m10, m11)

    def _parts(self, params: ModelParams):
        b0, b0h = slice_shapes(params, self.lags)
        b0, b0h = np.atleast_1d(b0), np.atleast_1d(b0h)
        a, bt, kp = params.alpha, params.beta, params.kappa
        xpos = self.series.values[self.pos_obs]
        xl, lj = _latent(params, xpos)
        lj = np.broadcast_to(lj, xl.shape)
        l00 = _log_f00(b0, b0h, a, bt, kp)
        l10 = _log_f10(xl[self.one_slot], b0[self.one_lag], b0h[self.one_lag], a, bt, kp)
        l10 = l10 + lj[self.one_slot]
        s1, s2 = self.two_slot1, self.two_slot2
        l11 = _log_f11(xl[s1], xl[s2], b0[self.two_lag], b0h[self.two_lag], a, bt, kp)
        l11 = l11 + (lj[s1] + lj[s2])
        return l00, l10, l11

    def _support_ok(self, params):
        if params.variant != MT or params.xi >= 0 or len(self.pos_obs) == 0:
            return True
        return self.series.values[self.pos_obs].max() < -params.sigma / params.xi

    def value(self, params: ModelParams) -> float:
        """Log pairwise likelihood; ``-inf`` outside the support."""
        if not self._support_ok(params):
            return -np.inf
        with np.errstate(all="ignore"):
            l00, l10, l11 = self._parts(params)
            total = np.sum(self.count00 * np.where(self.count00 > 0, l00, 0.0)) + l10.sum() + l11.sum()
        return float(total) if np.isfinite(total) else -np.inf

    def pair_values(self, params: ModelParams) -> np.ndarray:
        """Per-pair log densities in ``(i, j)`` order."""
        if not self._support_ok(params):
            raise ValueError("observations outside the GPD support of these parameters")
        l00, l10, l11 = self._parts(params)
        out = np.empty(self.n_pairs)
        m00, m10, m11 = self._masks
        out[m00] = l00[self.lag_id[m00]]
        out[m10] = l10
        out[m11] = l11
        return out

    def observation_values(self, params: ModelParams) -> np.ndarray:
        """Per-observation contributions (pairs attributed to their first index)."""
        return np.bincount(self.first, weights=self.pair_values(params), minlength=self.series.k)


def log_pairwise_likelihood(series: ExceedanceSeries, params: ModelParams, config: PLConfig = None) -> float:
    """Sum of log pair densities over pairs at index separation ``<= delta``."""
    config = config or PLConfig()
    pl = PairwiseLikelihood(series, config.delta)
    vals = pl.pair_values(params)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        n = int(np.argmax(bad))
        pair = (int(pl.first[n]), int(pl.second[n]))
        raise NonPositiveDensityError(f"pair density is nonpositive at pair {pair}", pair)
    return float(np.sum(vals))


# --- parameter transforms --------------------------------------------------------


def _to_free(variant, vec):
    vec = np.asarray(vec, dtype=float)
    if variant == ORIGINAL:
        return np.log(vec)
    return np.array([vec[0], np.log(vec[1]), np.log(vec[2]), np.log(vec[3])])


def _from_free(variant, free):
    free = np.asarray(free, dtype=float)
    if variant == ORIGINAL:
        return np.exp(free)
    return np.array([free[0], np.exp(free[1]), np.exp(free[2]), np.exp(free[3])])


def _params(variant, vec):
    try:
        return ModelParams.from_vector(variant, vec)
    except (ValueError, FloatingPointError):
        return None


# --- initialisation -----------------------------------------------------------------


def _pwm_gpd(x):
    x = np.sort(x)
    n = len(x)
    a0 = x.mean()
    a1 = np.mean(x * (n - 1 - np.arange(n)) / (n - 1))
    xi = 2 - a0 / (a0 - 2 * a1)
    sigma = 2 * a0 * a1 / (a0 - 2 * a1)
    return float(xi), float(sigma)


def _indicator_acf(series: ExceedanceSeries, nlags: int):
    ind = (series.values > 0).astype(float)
    ind = ind - ind.mean()
    var = np.dot(ind, ind) / len(ind)
    if var == 0:
        return np.zeros(nlags)
    return np.array([np.dot(ind[:-h], ind[h:]) / len(ind) / var for h in range(1, nlags + 1)])


def _model_indicator_acf(params: ModelParams, lags):
    b0, b0h = slice_shapes(params, lags)
    l1 = np.log1p(params.kappa / params.beta)
    l2 = np.log1p(2 * params.kappa / params.beta)
    p = exceedance_prob(params)
    both = np.exp(-2 * b0 * l1 - b0h * l2)
    return (both - p * p) / (p * (1 - p))


def init_heuristic(series: ExceedanceSeries, variant: str = ORIGINAL, config: PLConfig = None) -> ModelParams:
    """Starting values for :func:`fit`.

    GPD shape and scale come from probability-weighted moments of the
    positive values and κ from the exceedance frequency.  ρ is the
    least-squares match of the model-implied autocorrelation of the
    exceedance indicator to its empirical counterpart over lags
    ``1..acf_lags``; it is set to the upper bound when the empirical
    autocorrelation is not significantly positive.
    """
    config = config or PLConfig()
    x = series.values[series.values > 0]
    if len(x) < 10:
        raise ValueError(f"need at least 10 exceedances for initialisation, got {len(x)}")
    p = len(x) / series.k
    xi, sigma = _pwm_gpd(x)
    if variant == ORIGINAL:
        xi = max(xi, 0.02)
        alpha = 1 / xi
        total_scale = sigma / xi  # beta + kappa
        ratio = np.expm1(-np.log(p) / alpha) if p < 1 else 0.0  # kappa / beta
        beta = total_scale / (1 + ratio)
        kappa = max(beta * ratio, config.kappa_floor)
        base = ModelParams.original(alpha, beta, 1.0, kappa)
    elif variant == MT:
        xi = float(np.clip(xi, -0.9, 0.9))
        if xi < 0:
            sigma = max(sigma, -xi * x.max() * (1 + 1e-3))
        kappa = max(kappa_for_prob(1.0, 1.0, p) if p < 1 else 0.0, config.kappa_floor)
        base = ModelParams.mt(xi, sigma, 1.0, kappa)
    else:
        raise ValueError(f"unknown variant {variant!r}")

    lo, hi = config.rho_bounds
    step = float(np.median(np.diff(series.times))) if series.k > 1 else 1.0
    nl = min(config.acf_lags, series.k - 1)
    emp = _indicator_acf(series, nl)
    lags = step * np.arange(1, nl + 1)
    if p >= 1 or np.mean(emp[: min(3, nl)]) < 2 / np.sqrt(series.k):
        rho = hi
    else:
        def loss(log_rho):
            trial = ModelParams.from_vector(variant, [base.to_vector()[0], base.to_vector()[1], np.exp(log_rho), base.kappa])
            return float(np.sum((_model_indicator_acf(trial, lags) - emp) ** 2))

        res = optimize.minimize_scalar(loss, bounds=(np.log(lo), np.log(hi)), method="bounded")
        rho = float(np.exp(res.x))
    vec = base.to_vector()
    vec[2] = rho
    return ModelParams.from_vector(variant, vec)


# --- fitting --------------------------------------------------------------------------


@dataclass
class FitResult:
    params: ModelParams
    log_pl: float
    covariance: Optional[np.ndarray]
    grad_norm: float
    iterations: int
    converged: bool
    simplex_iterations: int = 0
    n_obs: int = 0
    n_pairs: int = 0
    message: str = ""
    config: dict = field(default_factory=dict)

    @property
    def estimates(self) -> dict:
        return dict(zip(self.params.names, self.params.to_vector().tolist()))

    @property
    def std_errors(self) -> Optional[dict]:
        if self.covariance is None:
            return None
        se = np.sqrt(np.clip(np.diag(self.covariance), 0, None))
        return dict(zip(self.params.names, se.tolist()))

    def to_dict(self) -> dict:
        return {
            "variant": self.params.variant,
            "estimates": self.estimates,
            "std_errors": self.std_errors,
            "covariance": None if self.covariance is None else self.covariance.tolist(),
            "log_pl": self.log_pl,
            "converged": self.converged,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "simplex_iterations": self.simplex_iterations,
            "n_obs": self.n_obs,
            "n_pairs": self.n_pairs,
            "message": self.message,
        }


def _central_gradient(f, x, step):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
    return g


def fit(
    series: ExceedanceSeries,
    variant: str = ORIGINAL,
    config: PLConfig = None,
    init: ModelParams = None,
    covariance: bool = True,
    polish_only: bool = False,
) -> FitResult:
    """Maximum pairwise likelihood estimate.

    Nelder-Mead on the transformed parameters, then BFGS with
    central-difference gradients.  The objective is minus the log pairwise
    likelihood divided by the series length.  ``polish_only`` skips the
    simplex stage.
    """
    config = config or PLConfig()
    if series.n_pos < 2:
        raise ValueError("need at least two exceedances to fit")
    pl = PairwiseLikelihood(series, config.delta)
    if init is None:
        init = init_heuristic(series, variant, config)
    elif init.variant != variant:
        raise ValueError("init variant does not match")
    if init.trawl.order != 1:
        raise ValueError("fitting supports the exponential trawl only")
    scale = 1.0 / series.k

    def objective(free):
        if not np.all(np.isfinite(free)) or np.any(np.abs(free[1:]) > 30):
            return np.inf
        p = _params(variant, _from_free(variant, free))
        if p is None:
            return np.inf
        v = pl.value(p)
        return -v * scale if np.isfinite(v) else np.inf

    x0 = _to_free(variant, init.to_vector())
    nit_simplex = 0
    if not polish_only:
        res = optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": config.simplex_maxiter,
                "xatol": config.simplex_xatol,
                "fatol": config.simplex_fatol,
                "adaptive": False,
            },
        )
        x0, nit_simplex = res.x, int(res.nit)
    grad = lambda z: _central_gradient(objective, z, config.fd_step)
    res = optimize.minimize(
        objective,
        x0,
        jac=grad,
        method="BFGS",
        options={"gtol": config.polish_gtol * 0.1, "maxiter": config.polish_maxiter},
    )
    xbest = res.x if res.fun <= objective(x0) else x0
    g = grad(xbest)
    gnorm = float(np.linalg.norm(g))
    params = ModelParams.from_vector(variant, _from_free(variant, xbest))
    log_pl = -objective(xbest) / scale
    converged = bool(np.isfinite(gnorm) and gnorm < config.polish_gtol)
    cov, msg = None, str(res.message)
    if covariance:
        try:
            cov = sandwich_covariance(series, params, config, _pl=pl)
        except (SingularHessianError, ValueError) as exc:
            msg = f"{msg}; covariance unavailable: {exc}"
    return FitResult(
        params=params,
        log_pl=float(log_pl),
        covariance=cov,
        grad_norm=gnorm,
        iterations=int(res.nit),
        converged=converged,
        simplex_iterations=nit_simplex,
        n_obs=series.k,
        n_pairs=pl.n_pairs,
        message=msg,
        config={"delta": config.delta},
    )


# --- sandwich covariance ----------------------------------------------------------------


def _steps(vec, rel):
    return rel * np.maximum(np.abs(vec), 1e-2)


def numerical_hessian(f, x, steps):
    """Central-difference Hessian of a scalar function."""
    n = len(x)
    H = np.zeros((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = steps[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / steps[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = steps[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * steps[i] * steps[j])
    return H


def _obm_variance(scores, block):
    """Overlapping-block estimate of the long-run covariance of score rows."""
    k = len(scores)
    block = int(min(max(block, 1), k))
    mean = scores.mean(axis=0)
    c = np.vstack([np.zeros(scores.shape[1]), np.cumsum(scores - mean, axis=0)])
    sums = c[block:] - c[:-block]
    return sums.T @ sums / (block * len(sums))


def sandwich_covariance(
    series: ExceedanceSeries,
    params: ModelParams,
    config: PLConfig = None,
    hessian_step: float = 1e-4,
    return_parts: bool = False,
    _pl: PairwiseLikelihood = None,
):
    """Godambe covariance ``H^-1 J H^-1 / k`` of the estimator in natural coordinates.

    ``H`` is minus the numerical Hessian of the mean log pairwise likelihood
    (per observation).  ``J`` is the overlapping-block variance of the
    per-observation score contributions with block length
    ``max(delta, ceil(3 / rho))`` unless configured.
    """
    config = config or PLConfig()
    pl = _pl or PairwiseLikelihood(series, config.delta)
    variant = params.variant
    theta = params.to_vector()
    k = series.k

    def mean_pl(vec):
        p = _params(variant, vec)
        return -np.inf if p is None else pl.value(p) / k

    steps = _steps(theta, hessian_step)
    H = -numerical_hessian(mean_pl, theta, steps)
    if not np.all(np.isfinite(H)):
        raise ValueError("Hessian is not finite at these parameters")
    cond = float(np.linalg.cond(H))
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularHessianError(f"Hessian is singular (condition number {cond:.3g})", cond)

    sstep = _steps(theta, config.fd_step)
    scores = np.zeros((k, len(theta)))
    for i in range(len(theta)):
        e = np.zeros(len(theta))
        e[i] = sstep[i]
        up = pl.observation_values(ModelParams.from_vector(variant, theta + e))
        dn = pl.observation_values(ModelParams.from_vector(variant, theta - e))
        scores[:, i] = (up - dn) / (2 * sstep[i])
    block = config.block_length or max(config.delta, math.ceil(3.0 / params.rho))
    J = _obm_variance(scores, block)
    Hinv = np.linalg.inv(H)
    cov = Hinv @ J @ Hinv / k
    cov = 0.5 * (cov + cov.T)
    if return_parts:
        return cov, H, J
    return cov


# --- full likelihood oracle --------------------------------------------------------------


def _mixed_partial(f, u, which, step_rel):
    """Central-difference mixed partial of ``f`` in the coordinates ``which``."""
    if not which:
        return f(u)
    steps = {i: step_rel * max(abs(u[i]), 1.0) for i in which}
    total = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=len(which)):
        v = u.copy()
        for i, s in zip(which, signs):
            v[i] += s * steps[i]
        total += np.prod(signs) * f(v)
    return total / np.prod([2 * steps[i] for i in which])


def full_likelihood_small_k(series: ExceedanceSeries, params: ModelParams, step: float = 1e-5) -> float:
    """Exact joint density of a short series by the ``2^m`` expansion.

    The density is an alternating sum over subsets of the zero observations
    of mixed partial derivatives of the joint Laplace transform, which are
    taken by central differences.  Intended as a test oracle only.
    """
    k = series.k
    if k > 12:
        raise ValueError("full likelihood is limited to k <= 12")
    t = series.times
    xl, lj = _latent(params, series.values[series.values > 0]) if series.n_pos else (np.zeros(0), 0.0)
    pos = np.flatnonzero(series.values > 0)
    zeros = np.flatnonzero(series.values == 0)
    l = len(pos)
    kappa = params.kappa
    seed, spec = params.seed, params.trawl
    # higher-order differences need a larger step to control rounding
    step = max(step, np.finfo(float).eps ** (1.0 / (l + 2))) if l > 2 else step

    def laplace(u):
        return joint_laplace(seed, spec, t, u)

    total = 0.0
    for size in range(len(zeros) + 1):
        for subset in itertools.combinations(zeros, size):
            u = np.zeros(k)
            u[pos] = kappa + xl
            u[list(subset)] = kappa
            total += (-1) ** (size + l) * _mixed_partial(laplace, u, list(pos), step)
    return float(total * np.exp(np.sum(lj)))
