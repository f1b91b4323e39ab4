"""
Hierarchical exceedance model driven by a latent Gamma trawl process.

Conditionally on the latent value ``Λ_j``, ``X_j`` is zero with probability
``1 - exp(-κ Λ_j)`` and otherwise exponential with rate ``Λ_j``.  With
``Λ ~ Gamma(α, β)`` the positive part is GPD(α, β + κ).  The marginal
transformation (MT) variant pins ``α = β = 1`` and maps positive values
through ``g = F^{-1}_{GPD(ξ,σ)} ∘ F_{GPD(1, 1+κ)}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import integrate

from .gpd import XI_ZERO, upper_endpoint
from .trawl import GammaSeed, TrawlSpec, _rng, simulate_trawl

__all__ = [
    "ModelParams",
    "ExceedanceSeries",
    "ZERO_TOL",
    "slice_shapes",
    "exceedance_prob",
    "kappa_for_prob",
    "simulate_exceedances",
    "transform_mt",
    "inverse_transform_mt",
    "mt_jacobian",
    "mt_log_jacobian",
    "mean_exceedance",
    "second_moment_exceedance",
    "joint_exceedance_survivor",
    "acov_exceedance",
    "acf_exceedance",
    "QuadratureError",
]

ORIGINAL = "original"
MT = "mt"

# thresholded values at or below this are the model's atom at zero
ZERO_TOL = 1e-12


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the latent trawl exceedance model.

    Use :meth:`original` or :meth:`mt` to construct.  For the MT variant the
    latent layer has ``alpha = beta = 1``.
    """

    variant: str
    trawl: TrawlSpec
    kappa: float
    alpha: float = 1.0
    beta: float = 1.0
    xi: Optional[float] = None
    sigma: Optional[float] = None

    def __post_init__(self):
        if self.variant not in (ORIGINAL, MT):
            raise ValueError(f"variant must be 'original' or 'mt', got {self.variant!r}")
        if not (np.isfinite(self.kappa) and self.kappa >= 0):
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        GammaSeed(self.alpha, self.beta)
        if self.variant == MT:
            if self.alpha != 1.0 or self.beta != 1.0:
                raise ValueError("MT variant pins the latent layer at alpha = beta = 1")
            if self.xi is None or self.sigma is None or not np.isfinite(self.xi) or not self.sigma > 0:
                raise ValueError("MT variant needs finite xi and positive sigma")

    @classmethod
    def original(cls, alpha, beta, rho=None, kappa=0.0, trawl=None):
        return cls(ORIGINAL, _trawl(rho, trawl), float(kappa), float(alpha), float(beta))

    @classmethod
    def mt(cls, xi, sigma, rho=None, kappa=0.0, trawl=None):
        return cls(MT, _trawl(rho, trawl), float(kappa), 1.0, 1.0, float(xi), float(sigma))

    @property
    def seed(self) -> GammaSeed:
        return GammaSeed(self.alpha, self.beta)

    @property
    def rho(self) -> float:
        if self.trawl.order != 1:
            raise ValueError("rho is only defined for the plain exponential trawl")
        return self.trawl.decays[0]

    @property
    def names(self) -> tuple:
        if self.variant == ORIGINAL:
            return ("alpha", "beta", "rho", "kappa")
        return ("xi", "sigma", "rho", "kappa")

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.names], dtype=float)

    @classmethod
    def from_vector(cls, variant, vec):
        a, b, rho, kappa = (float(v) for v in vec)
        if variant == ORIGINAL:
            return cls.original(a, b, rho, kappa)
        return cls.mt(a, b, rho, kappa)

    def as_dict(self) -> dict:
        d = {"variant": self.variant, "kappa": self.kappa}
        if self.variant == ORIGINAL:
            d.update(alpha=self.alpha, beta=self.beta)
        else:
            d.update(xi=self.xi, sigma=self.sigma)
        d["trawl"] = {"weights": list(self.trawl.weights), "decays": list(self.trawl.decays)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        if "trawl" in d:
            trawl = TrawlSpec(tuple(d["trawl"]["weights"]), tuple(d["trawl"]["decays"]))
        else:
            trawl = TrawlSpec.exponential(d["rho"])
        if d.get("variant", ORIGINAL) == ORIGINAL:
            return cls.original(d["alpha"], d["beta"], kappa=d["kappa"], trawl=trawl)
        return cls.mt(d["xi"], d["sigma"], kappa=d["kappa"], trawl=trawl)

    def with_kappa(self, kappa) -> "ModelParams":
        return replace(self, kappa=float(kappa))


def _trawl(rho, trawl):
    if trawl is not None:
        return trawl
    if rho is None:
        raise ValueError("give either rho or a TrawlSpec")
    return TrawlSpec.exponential(rho)


@dataclass
class ExceedanceSeries:
    """Thresholded series ``X_j = max(Y_j - u, 0)``.

    ``index`` holds positions on the original observation grid; missing
    observations are absent from ``times``/``values`` but keep their slot in
    ``index`` so that pair separation is counted on the original grid.
    """

    times: np.ndarray
    values: np.ndarray
    threshold: float = 0.0
    index: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if np.any(~np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("exceedance values must be finite and nonnegative")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        self.values = np.where(self.values <= ZERO_TOL, 0.0, self.values)
        if self.index is None:
            self.index = np.arange(len(self.values))
        else:
            self.index = np.asarray(self.index, dtype=np.int64)
            if self.index.shape != self.values.shape or np.any(np.diff(self.index) <= 0):
                raise ValueError("index must be strictly increasing and match values")

    @classmethod
    def from_observations(cls, times, y, threshold, **kw) -> "ExceedanceSeries":
        y = np.asarray(y, dtype=float)
        return cls(times, np.maximum(y - threshold, 0.0), float(threshold), **kw)

    def __len__(self):
        return len(self.values)

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def n_pos(self) -> int:
        return int(np.count_nonzero(self.values > 0))

    @property
    def n_zero(self) -> int:
        return self.k - self.n_pos


def slice_shapes(params: ModelParams, h):
    """Gamma shapes ``(b_0, b_{0,h})`` of the slices ``A_0 \\ A_h`` and ``A_0 ∩ A_h``.

    ``b_h = b_0`` by translation invariance.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise ValueError("lag h must be positive")
    spec = params.trawl
    area = spec.area()
    b_both = params.alpha * spec.overlap(h) / area
    b_only = np.zeros(h.shape)
    for w, r in zip(spec.weights, spec.decays):
        b_only = b_only - (w / r) * np.expm1(-r * h)
    b_only = params.alpha * b_only / area
    if not h.ndim:
        return float(b_only), float(b_both)
    return b_only, b_both


def exceedance_prob(params: ModelParams) -> float:
    """``P(X > 0) = (1 + κ/β)^-α``."""
    return float(np.exp(-params.alpha * np.log1p(params.kappa / params.beta)))


def kappa_for_prob(alpha: float, beta: float, prob: float) -> float:
    """κ such that ``(1 + κ/β)^-α = prob``."""
    if not 0 < prob <= 1:
        raise ValueError("prob must lie in (0, 1]")
    return float(beta * np.expm1(-np.log(prob) / alpha))


# --- marginal transformation -------------------------------------------------


def _latent_scale(kappa):
    return 1.0 + kappa


def transform_mt(x, kappa, xi, sigma):
    """``g(x) = F^{-1}_{GPD(ξ,σ)}(F_{GPD(1,1+κ)}(x))`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("transform_mt needs nonnegative x")
    s = np.log1p(x / _latent_scale(kappa))  # -log survival of GPD(1, 1+κ)
    out = sigma * s if abs(xi) < XI_ZERO else sigma * np.expm1(xi * s) / xi
    return out if out.ndim else float(out)


def _z_tail(z, xi, sigma):
    z = np.asarray(z, dtype=float)
    end = upper_endpoint(xi, sigma)
    if np.any(z < 0) or np.any(z > end * (1 + 1e-12)) or np.any(np.isnan(z)):
        raise ValueError(f"z outside the GPD(xi={xi}, sigma={sigma}) support")
    z = np.minimum(z, end)
    if abs(xi) < XI_ZERO:
        return z / sigma
    with np.errstate(divide="ignore"):
        return np.log1p(xi * z / sigma) / xi


def inverse_transform_mt(z, kappa, xi, sigma):
    out = _latent_scale(kappa) * np.expm1(_z_tail(z, xi, sigma))
    return out if np.ndim(out) else float(out)


def mt_log_jacobian(z, kappa, xi, sigma):
    """``log |d g^{-1}(z)/dz| = log f_{GPD(ξ,σ)}(z) - log f_{GPD(1,1+κ)}(g^{-1}(z))``."""
    s = _z_tail(z, xi, sigma)
    return np.log(_latent_scale(kappa)) - np.log(sigma) + (1.0 - xi) * s


def mt_jacobian(z, kappa, xi, sigma):
    out = np.exp(mt_log_jacobian(z, kappa, xi, sigma))
    return out if np.ndim(out) else float(out)


# --- simulation ----------------------------------------------------------------


def simulate_exceedances(params: ModelParams, times, rng=None, return_latent=False):
    """Simulate the exceedance process at ``times``.

    The latent path is drawn exactly; each ``X_j`` is then zero with
    probability ``1 - exp(-κ Λ_j)`` and exponential with rate ``Λ_j``
    otherwise.  MT positives are mapped through :func:`transform_mt`.
    """
    gen = _rng(rng)
    times = np.asarray(times, dtype=float)
    lam = simulate_trawl(params.seed, params.trawl, times, gen)
    u = gen.random(len(times))
    e = gen.standard_exponential(len(times))
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(u < np.exp(-params.kappa * lam), e / lam, 0.0)
    x = np.where(np.isfinite(x), x, 0.0)
    if params.variant == MT:
        x = transform_mt(x, params.kappa, params.xi, params.sigma)
    series = ExceedanceSeries(times, x, 0.0, metadata={"simulated": params.as_dict()})
    return (series, lam) if return_latent else series


# --- moments -----------------------------------------------------------------


def mean_exceedance(params: ModelParams) -> float:
    """``E X`` (original: ``(1+κ/β)^-α (β+κ)/(α-1)``; MT: ``σ/((1+κ)(1-ξ))``)."""
    p = exceedance_prob(params)
    if params.variant == ORIGINAL:
        if params.alpha <= 1:
            raise ValueError("mean is infinite for alpha <= 1")
        return p * (params.beta + params.kappa) / (params.alpha - 1)
    if params.xi >= 1:
        raise ValueError("mean is infinite for xi >= 1")
    return p * params.sigma / (1 - params.xi)


def second_moment_exceedance(params: ModelParams) -> float:
    p = exceedance_prob(params)
    if params.variant == ORIGINAL:
        a, s = params.alpha, params.beta + params.kappa
        if a <= 2:
            raise ValueError("second moment is infinite for alpha <= 2")
        return p * 2 * s**2 / ((a - 1) * (a - 2))
    xi, sg = params.xi, params.sigma
    if xi >= 0.5:
        raise ValueError("second moment is infinite for xi >= 1/2")
    return p * 2 * sg**2 / ((1 - xi) * (1 - 2 * xi))


def joint_exceedance_survivor(params: ModelParams, h, x0, xh):
    """``P(X_0 > x0, X_h > xh)`` for ``x0, xh >= 0`` (both strictly positive events).

    MT parameters are evaluated on the latent scale after ``g^{-1}``.
    """
    x0 = np.asarray(x0, dtype=float)
    xh = np.asarray(xh, dtype=float)
    if np.any(x0 < 0) or np.any(xh < 0):
        raise ValueError("thresholds must be nonnegative")
    if params.variant == MT:
        x0 = inverse_transform_mt(x0, params.kappa, params.xi, params.sigma)
        xh = inverse_transform_mt(xh, params.kappa, params.xi, params.sigma)
    b0, b0h = slice_shapes(params, h)
    beta, kappa = params.beta, params.kappa
    log_s = (
        -b0 * np.log1p((kappa + x0) / beta)
        - b0h * np.log1p((2 * kappa + x0 + xh) / beta)
        - b0 * np.log1p((kappa + xh) / beta)
    )
    out = np.exp(log_s)
    return out if np.ndim(out) else float(out)


def _cross_moment(params: ModelParams, h, epsabs=1e-9):
    b0, b0h = slice_shapes(params, h)
    b0, b0h = float(b0), float(b0h)
    beta, kappa = params.beta, params.kappa
    scale = beta + kappa

    # u = κ + scale * t / (1 - t) maps (0, 1) onto (κ, ∞)
    def integrand(t0, th):
        if t0 >= 1.0 or th >= 1.0:
            return 0.0
        r0, rh = t0 / (1 - t0), th / (1 - th)
        u0, uh = kappa + scale * r0, kappa + scale * rh
        log_f = (
            -b0 * np.log1p(u0 / beta)
            - b0h * np.log1p((u0 + uh) / beta)
            - b0 * np.log1p(uh / beta)
        )
        jac = scale**2 / ((1 - t0) ** 2 * (1 - th) ** 2)
        return float(np.exp(log_f) * jac)

    val, err = integrate.dblquad(integrand, 0.0, 1.0, 0.0, 1.0, epsabs=epsabs, epsrel=1e-10)
    if err > 1e-6:
        raise QuadratureError(f"cross-moment quadrature error estimate {err:.2e} exceeds 1e-6")
    return val, err


def acov_exceedance(params: ModelParams, h, return_error=False):
    """Autocovariance ``E[X_0 X_h] - (E X)^2`` at lag ``h > 0`` by double quadrature.

    Only the original variant has a closed-form integrand; MT autocovariances
    have to be estimated by simulation.
    """
    if params.variant != ORIGINAL:
        raise NotImplementedError("MT autocovariance is available by simulation only")
    if params.alpha <= 2:
        raise ValueError("autocovariance needs alpha > 2")
    if np.ndim(h):
        res = [acov_exceedance(params, float(v), return_error) for v in np.ravel(h)]
        if return_error:
            return np.array([r[0] for r in res]), np.array([r[1] for r in res])
        return np.array(res)
    val, err = _cross_moment(params, h)
    out = val - mean_exceedance(params) ** 2
    return (out, err) if return_error else out


def acf_exceedance(params: ModelParams, h):
    """Autocorrelation of the exceedance process at lags ``h > 0``."""
    var = second_moment_exceedance(params) - mean_exceedance(params) ** 2
    return acov_exceedance(params, h) / var
