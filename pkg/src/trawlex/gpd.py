"""Generalised Pareto distribution in the (xi, sigma) or (alpha, beta) parametrisation.

``param="alpha"`` reads the pair as ``(alpha, beta)`` with density
``(alpha/beta) (1 + x/beta)^-(alpha+1)``, i.e. ``xi = 1/alpha`` and
``sigma = beta/alpha``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["to_xi_sigma", "upper_endpoint", "gpd_pdf", "gpd_logpdf", "gpd_cdf", "gpd_sf", "gpd_quantile"]

XI_ZERO = 1e-8


def to_xi_sigma(shape, scale, param="xi"):
    if param == "xi":
        xi, sigma = float(shape), float(scale)
    elif param == "alpha":
        if not shape > 0:
            raise ValueError("alpha must be positive")
        xi, sigma = 1.0 / shape, scale / shape
    else:
        raise ValueError(f"unknown parametrisation {param!r}")
    if not sigma > 0:
        raise ValueError("scale must be positive")
    return xi, sigma


def upper_endpoint(xi, sigma):
    return -sigma / xi if xi < -XI_ZERO else np.inf


def _checked(x, xi, sigma):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("x outside GPD support (negative)")
    end = upper_endpoint(xi, sigma)
    if np.any(x > end * (1 + 1e-12)):
        raise ValueError(f"x outside GPD support (upper endpoint {end})")
    return np.minimum(x, end)


def _log1p_term(x, xi, sigma):
    # log(1 + xi x / sigma) / xi, continuous through xi = 0
    if abs(xi) < XI_ZERO:
        return x / sigma
    return np.log1p(xi * x / sigma) / xi


def gpd_logpdf(x, shape, scale, param="xi"):
    xi, sigma = to_xi_sigma(shape, scale, param)
    x = _checked(x, xi, sigma)
    with np.errstate(divide="ignore"):
        out = -np.log(sigma) - (1 + xi) * _log1p_term(x, xi, sigma)
    return out if out.ndim else float(out)


def gpd_pdf(x, shape, scale, param="xi"):
    out = np.exp(gpd_logpdf(x, shape, scale, param))
    return out if np.ndim(out) else float(out)


def gpd_sf(x, shape, scale, param="xi"):
    xi, sigma = to_xi_sigma(shape, scale, param)
    x = _checked(x, xi, sigma)
    with np.errstate(divide="ignore"):
        out = np.exp(-_log1p_term(x, xi, sigma))
    return out if out.ndim else float(out)


def gpd_cdf(x, shape, scale, param="xi"):
    xi, sigma = to_xi_sigma(shape, scale, param)
    x = _checked(x, xi, sigma)
    with np.errstate(divide="ignore"):
        out = -np.expm1(-_log1p_term(x, xi, sigma))
    return out if out.ndim else float(out)


def gpd_quantile(p, shape, scale, param="xi"):
    xi, sigma = to_xi_sigma(shape, scale, param)
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > 1) or np.any(np.isnan(p)):
        raise ValueError("probability outside [0, 1]")
    with np.errstate(divide="ignore"):
        tail = -np.log1p(-p)
        if abs(xi) < XI_ZERO:
            out = sigma * tail
        else:
            out = sigma * np.expm1(xi * tail) / xi
    return out if out.ndim else float(out)
