"""
Extremal dependence diagnostics.

The conditional tail dependence function compares the two members of a pair
``(X_0, X_h)`` on the common scale of their conditional distribution given
that both are positive,

    F2e(x) = 1 - (1 + x/(β + 2κ))^-b0h (1 + x/(β + κ))^-b0.

MT parameters are handled on the latent scale (``α = β = 1``); the
dependence function is rank-based, so it is unchanged by the monotone map
``g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .model import MT, ModelParams, inverse_transform_mt, slice_shapes, transform_mt

__all__ = [
    "TailDepCurve",
    "TailDepReport",
    "ClusterSummary",
    "NoExceedancesError",
    "f2e",
    "f2e_inverse",
    "cond_tail_dep",
    "cond_tail_dep_curve",
    "cond_tail_dep_limit",
    "extremal_index_runs",
    "extremal_index_curve",
    "empirical_chi",
]


class NoExceedancesError(ValueError):
    pass


def _shapes(params, h):
    b0, b0h = slice_shapes(params, h)
    return float(b0), float(b0h)


def _log_sf_latent(x, b0, b0h, beta, kappa):
    return -b0h * np.log1p(x / (beta + 2 * kappa)) - b0 * np.log1p(x / (beta + kappa))


def f2e(params: ModelParams, h, x):
    """``P(X_0 <= x | X_0 > 0, X_h > 0)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    if params.variant == MT:
        x = inverse_transform_mt(x, params.kappa, params.xi, params.sigma)
    b0, b0h = _shapes(params, h)
    out = -np.expm1(_log_sf_latent(x, b0, b0h, params.beta, params.kappa))
    return out if out.ndim else float(out)


def _latent_inverse(p, b0, b0h, beta, kappa):
    if p == 0:
        return 0.0
    target = np.log1p(-p)
    f = lambda x: _log_sf_latent(x, b0, b0h, beta, kappa) - target
    hi = beta + kappa
    while f(hi) > 0:
        hi *= 2.0
        if not np.isfinite(hi):
            raise OverflowError("failed to bracket the F2e quantile")
    return optimize.brentq(f, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def f2e_inverse(params: ModelParams, h, p):
    """Quantile of :func:`f2e`; ``p`` in ``[0, 1)``.

    The root is bracketed by doubling from ``β + κ`` and then located on the
    log-survival scale.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 0) or np.any(p_arr >= 1) or np.any(np.isnan(p_arr)):
        raise ValueError("p must lie in [0, 1)")
    b0, b0h = _shapes(params, h)
    out = np.array([_latent_inverse(float(v), b0, b0h, params.beta, params.kappa) for v in p_arr.ravel()])
    out = out.reshape(p_arr.shape)
    if params.variant == MT:
        out = transform_mt(out, params.kappa, params.xi, params.sigma)
    return out if out.ndim else float(out)


def cond_tail_dep(params: ModelParams, h, u1, u2):
    """Conditional tail dependence function ``φ(h, u1, u2)``."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    for u in (u1, u2):
        if np.any(u < 0) or np.any(u >= 1) or np.any(np.isnan(u)):
            raise ValueError("u1 and u2 must lie in [0, 1)")
    b0, b0h = _shapes(params, h)
    beta, kappa = params.beta, params.kappa
    inv = np.vectorize(lambda p: _latent_inverse(p, b0, b0h, beta, kappa), otypes=[float])
    q1, q2 = inv(u1), inv(u2)
    out = np.exp(-b0h * np.log1p(q2 / (beta + 2 * kappa + q1)) - b0 * np.log1p(q2 / (beta + kappa)))
    return out if out.ndim else float(out)


@dataclass
class TailDepCurve:
    lag: float
    u: np.ndarray
    values: np.ndarray


def cond_tail_dep_curve(params: ModelParams, h, u) -> TailDepCurve:
    u = np.asarray(u, dtype=float)
    return TailDepCurve(float(h), u, cond_tail_dep(params, h, u, u))


@dataclass
class TailDepReport:
    """Limit of ``φ(h, u, u)`` as ``u -> 1`` with the decay on a grid."""

    limit: float
    lag: float
    u: np.ndarray
    values: np.ndarray
    b_only: float
    b_both: float
    note: str = field(default="")


def cond_tail_dep_limit(params: ModelParams, h, n_nines: int = 6) -> TailDepReport:
    """The model is asymptotically independent: the limit is always 0.

    The grid is ``0.9, 0.99, ...`` with ``n_nines`` points.  Decay towards 0
    is faster for larger ``b0`` (the non-overlapping part of the trawl pair).
    """
    if not h > 0:
        raise ValueError("lag h must be positive")
    u = 1 - 10.0 ** -np.arange(1, n_nines + 1)
    curve = cond_tail_dep_curve(params, h, u)
    b0, b0h = _shapes(params, h)
    note = (
        f"phi(h,u,u) -> 0 as u -> 1; the leading factor (1 + q/(beta+kappa))^-{b0:.4g} "
        "decays faster when the non-overlapping slice shape b0 is larger"
    )
    return TailDepReport(0.0, float(h), u, curve.values, b0, b0h, note)


# --- extremal index --------------------------------------------------------------------


@dataclass
class ClusterSummary:
    threshold: float
    run_length: int
    n_clusters: int
    n_exceedances: int

    @property
    def theta(self) -> float:
        return self.n_clusters / self.n_exceedances


def extremal_index_runs(values, threshold, run_length: int = 3) -> ClusterSummary:
    """Runs estimate of the extremal index.

    A cluster ends once ``run_length`` consecutive observations are at or
    below ``threshold``; ``theta = clusters / exceedances``.  Missing values
    (NaN) count as non-exceedances.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("values must be non-empty")
    if int(run_length) != run_length or run_length < 1:
        raise ValueError("run_length must be an integer >= 1")
    pos = np.flatnonzero(v > threshold)
    if len(pos) == 0:
        raise NoExceedancesError(f"no exceedances of threshold {threshold}")
    gaps = np.diff(pos) - 1
    n_clusters = 1 + int(np.count_nonzero(gaps >= run_length))
    return ClusterSummary(float(threshold), int(run_length), n_clusters, len(pos))


def extremal_index_curve(values, thresholds, run_length: int = 3):
    """Runs estimates over a threshold grid; ``nan`` where nothing exceeds."""
    out = []
    for u in np.asarray(thresholds, dtype=float):
        try:
            out.append(extremal_index_runs(values, u, run_length).theta)
        except NoExceedancesError:
            out.append(np.nan)
    return np.array(out)


# --- empirical chi -----------------------------------------------------------------------


@dataclass
class ChiCurve:
    u: np.ndarray
    chi: np.ndarray
    se: np.ndarray
    n_pairs: int
    conditional: bool


def _ranks(x):
    """Ranks scaled by ``n + 1``; ties share their largest rank (the empirical CDF value)."""
    order = np.argsort(x, kind="mergesort")
    _, first, counts = np.unique(x[order], return_index=True, return_counts=True)
    ranks = np.empty(len(x))
    ranks[order] = np.repeat(first + counts, counts)
    return ranks / (len(x) + 1)


def empirical_chi(values, u, lag: int = 1, conditional: bool = False, min_pairs: int = 100) -> ChiCurve:
    """Empirical ``P(F(X_{t+lag}) > u | F(X_t) > u)`` on the rank scale.

    With ``conditional=True`` only pairs with both members positive are used
    and ranks are taken within that subset, which estimates ``φ(lag, u, u)``.
    """
    v = np.asarray(values, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if lag < 1 or int(lag) != lag:
        raise ValueError("lag must be a positive integer")
    a, b = v[:-lag], v[lag:]
    ok = np.isfinite(a) & np.isfinite(b)
    if conditional:
        ok &= (a > 0) & (b > 0)
    a, b = a[ok], b[ok]
    if len(a) < min_pairs:
        raise ValueError(f"insufficient pairs at lag {lag}: {len(a)} < {min_pairs}")
    # ranks on the pooled marginal, shared by both members of the pair
    pooled = _ranks(np.concatenate([a, b]))
    ra, rb = pooled[: len(a)], pooled[len(a) :]
    chi = np.full(len(u), np.nan)
    se = np.full(len(u), np.nan)
    for n, level in enumerate(u):
        cond = ra > level
        m = int(cond.sum())
        if m:
            c = float(np.mean(rb[cond] > level))
            chi[n] = c
            se[n] = np.sqrt(c * (1 - c) / m)
    return ChiCurve(u, chi, se, len(a), conditional)
