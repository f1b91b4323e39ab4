import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, stats

from _helpers import ORIGINAL_SET, batch_mean_se, long_orig_path, orig_params, mt_params
from trawlex import (
    ModelParams,
    TrawlSpec,
    acf_exceedance,
    acov_exceedance,
    exceedance_prob,
    gpd_cdf,
    gpd_pdf,
    gpd_quantile,
    inverse_transform_mt,
    joint_exceedance_survivor,
    kappa_for_prob,
    mean_exceedance,
    mt_jacobian,
    simulate_exceedances,
    transform_mt,
)
from trawlex.gpd import upper_endpoint
from trawlex.model import ExceedanceSeries, second_moment_exceedance, slice_shapes

# κ giving P(X > 0) = 0.05 at α = β = 4, from an independent root-find (see test below)
KAPPA_ALPHA4 = 4.458970107524511


# --- GPD --------------------------------------------------------------------------------


class TestGPD:
    def test_origin(self):
        assert gpd_cdf(0.0, 0.2, 1.0) == 0.0
        assert gpd_quantile(0.0, 0.2, 1.0) == 0.0

    def test_alpha_beta_parametrisation(self):
        assert gpd_cdf(1.0, 1.0, 1.0, param="alpha") == pytest.approx(0.5, rel=1e-15)
        assert gpd_pdf(0.0, 2.0, 3.0, param="alpha") == pytest.approx(2 / 3)

    def test_bounded_support(self):
        xi, sigma = -0.11, 20.73
        end = upper_endpoint(xi, sigma)
        assert end == pytest.approx(188.45454545454547, rel=1e-14)
        assert gpd_cdf(end, xi, sigma) == pytest.approx(1.0, abs=1e-15)
        # quantiles approach the endpoint slowly: end - q(1 - t) = end * t^(-xi)
        tails = 10.0 ** -np.arange(2, 13)
        q = gpd_quantile(1 - tails, xi, sigma)
        assert np.all(np.diff(q) > 0) and np.all(q < end)
        np.testing.assert_allclose(end - q, end * tails ** (-xi), rtol=1e-3)
        with pytest.raises(ValueError):
            gpd_cdf(end * 1.001, xi, sigma)

    @pytest.mark.parametrize("p", [-0.1, 1.1, np.nan])
    def test_quantile_domain(self, p):
        with pytest.raises(ValueError):
            gpd_quantile(p, 0.1, 1.0)

    def test_negative_x(self):
        with pytest.raises(ValueError):
            gpd_pdf(-1.0, 0.1, 1.0)

    def test_bad_scale(self):
        with pytest.raises(ValueError):
            gpd_cdf(1.0, 0.1, -1.0)

    def test_exponential_limit(self):
        x = np.linspace(0, 10, 11)
        np.testing.assert_allclose(gpd_cdf(x, 0.0, 2.0), 1 - np.exp(-x / 2), rtol=1e-14)
        np.testing.assert_allclose(gpd_cdf(x, 1e-9, 2.0), 1 - np.exp(-x / 2), rtol=1e-7)

    @given(st.floats(-0.9, 2.0), st.floats(0.1, 50.0), st.floats(0.0, 0.999))
    @settings(max_examples=100, deadline=None)
    def test_against_scipy(self, xi, sigma, p):
        x = gpd_quantile(p, xi, sigma)
        ref = stats.genpareto(xi, scale=sigma)
        assert x == pytest.approx(ref.ppf(p), rel=1e-9, abs=1e-12)
        assert gpd_cdf(x, xi, sigma) == pytest.approx(p, rel=1e-9, abs=1e-13)
        assert gpd_pdf(x, xi, sigma) == pytest.approx(ref.pdf(x), rel=1e-9)


# --- parameters and series ----------------------------------------------------------------


class TestParams:
    def test_vector_round_trip(self):
        p = orig_params()
        assert ModelParams.from_vector("original", p.to_vector()) == p
        assert ModelParams.from_dict(p.as_dict()) == p
        q = mt_params()
        assert q.names == ("xi", "sigma", "rho", "kappa")
        assert ModelParams.from_dict(q.as_dict()) == q

    def test_mt_pins_latent_layer(self):
        q = mt_params()
        assert (q.alpha, q.beta) == (1.0, 1.0)
        with pytest.raises(ValueError):
            ModelParams("mt", TrawlSpec.exponential(1.0), 1.0, alpha=2.0, beta=1.0, xi=0.1, sigma=1.0)

    @pytest.mark.parametrize("bad", [dict(alpha=-1, beta=1), dict(alpha=1, beta=0), dict(alpha=1, beta=1, kappa=-1)])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            ModelParams.original(rho=1.0, **bad)

    def test_series_from_observations(self):
        s = ExceedanceSeries.from_observations([0, 1, 2], [1.0, 2.0, 3.0], 2.0)
        assert s.values.tolist() == [0.0, 0.0, 1.0]
        assert (s.n_pos, s.n_zero, s.k) == (1, 2, 3)

    def test_series_snaps_tiny_values(self):
        s = ExceedanceSeries.from_observations([0, 1], [0.1 + 0.2, 0.3], 0.3)
        assert s.values.tolist() == [0.0, 0.0]

    def test_series_validation(self):
        with pytest.raises(ValueError):
            ExceedanceSeries(np.array([0.0, 0.0]), np.array([1.0, 0.0]), 0.0)
        with pytest.raises(ValueError):
            ExceedanceSeries(np.array([0.0, 1.0]), np.array([-1.0, 0.0]), 0.0)

    def test_slice_shapes_sum(self):
        b0, b0h = slice_shapes(orig_params(), np.array([1e-9, 0.5, 3.0, 100.0]))
        np.testing.assert_allclose(b0 + b0h, ORIGINAL_SET["alpha"], rtol=1e-14)
        assert b0[0] == pytest.approx(ORIGINAL_SET["alpha"] * 0.27e-9, rel=1e-6)
        with pytest.raises(ValueError):
            slice_shapes(orig_params(), 0.0)


# --- exceedance probability ---------------------------------------------------------------


class TestExceedanceProb:
    def test_examples(self):
        assert exceedance_prob(ModelParams.original(2.0, 3.0, rho=1.0, kappa=0.0)) == 1.0
        assert exceedance_prob(ModelParams.original(1.0, 1.0, rho=1.0, kappa=1.0)) == pytest.approx(0.5)
        assert exceedance_prob(mt_params()) == pytest.approx(1 / (1 + 32.69))

    def test_inversion(self):
        oracle = optimize.brentq(lambda k: (1 + k / 4) ** -4 - 0.05, 0, 100, xtol=1e-14)
        assert kappa_for_prob(4.0, 4.0, 0.05) == pytest.approx(oracle, rel=1e-12)
        assert kappa_for_prob(4.0, 4.0, 0.05) == pytest.approx(KAPPA_ALPHA4, rel=1e-12)
        with pytest.raises(ValueError):
            kappa_for_prob(4.0, 4.0, 0.0)

    def test_simulated_frequency(self):
        x = long_orig_path()
        p = exceedance_prob(orig_params())
        m, se = batch_mean_se(x > 0)
        assert abs(m - p) <= 4 * se


# --- marginal transformation --------------------------------------------------------------


class TestTransform:
    def test_origin(self):
        assert transform_mt(0.0, 3.0, -0.2, 5.0) == 0.0
        assert transform_mt(1e-12, 3.0, -0.2, 5.0) > 0

    def test_identity(self):
        x = np.array([0.1, 1.0, 10.0, 1000.0])
        np.testing.assert_allclose(transform_mt(x, 2.5, 1.0, 3.5), x, rtol=1e-13)

    def test_cdf_matching(self):
        x = np.array([0.3, 3.0, 30.0])
        kappa, xi, sigma = 32.69, -0.11, 20.73
        z = transform_mt(x, kappa, xi, sigma)
        np.testing.assert_allclose(gpd_cdf(z, xi, sigma), gpd_cdf(x, 1.0, 1 + kappa), rtol=1e-12)

    @given(st.floats(1e-3, 1e4), st.floats(0.0, 50.0), st.floats(-0.9, 1.5), st.floats(0.1, 50.0))
    @settings(max_examples=150, deadline=None)
    def test_round_trip(self, x, kappa, xi, sigma):
        z = transform_mt(x, kappa, xi, sigma)
        assert inverse_transform_mt(z, kappa, xi, sigma) == pytest.approx(x, rel=1e-10)

    @given(st.floats(0.01, 100.0), st.floats(0.0, 50.0), st.floats(-0.5, 1.0), st.floats(0.5, 50.0))
    @settings(max_examples=100, deadline=None)
    def test_jacobian(self, x, kappa, xi, sigma):
        z = transform_mt(x, kappa, xi, sigma)
        J = mt_jacobian(z, kappa, xi, sigma)
        assert J > 0
        # J is the density ratio f_GPD(xi, sigma)(z) / f_GPD(1, 1+kappa)(x)
        ratio = gpd_pdf(z, xi, sigma) / gpd_pdf(x, 1.0, 1 + kappa)
        assert J == pytest.approx(ratio, rel=1e-9)
        # and the derivative of the inverse map
        e = 1e-6 * z
        if xi < 0:
            e = min(e, 0.5 * (upper_endpoint(xi, sigma) - z))
        fd = (inverse_transform_mt(z + e, kappa, xi, sigma) - inverse_transform_mt(z - e, kappa, xi, sigma)) / (2 * e)
        assert fd == pytest.approx(J, rel=1e-6)

    def test_outside_support(self):
        with pytest.raises(ValueError):
            inverse_transform_mt(200.0, 32.69, -0.11, 20.73)
        with pytest.raises(ValueError):
            inverse_transform_mt(-1.0, 32.69, -0.11, 20.73)


# --- simulation -----------------------------------------------------------------------


class TestSimulateExceedances:
    def test_huge_kappa_all_zero(self):
        p = ModelParams.original(2.0, 1.0, rho=0.5, kappa=1e6)
        assert np.all(simulate_exceedances(p, np.arange(1000.0), 0).values == 0)

    def test_original_marginal(self):
        p = orig_params()
        times = 40.0 * np.arange(100_000)
        x = simulate_exceedances(p, times, 1).values
        pos = x[x > 0]
        ks = stats.kstest(pos, lambda v: gpd_cdf(v, ORIGINAL_SET["alpha"], ORIGINAL_SET["beta"] + ORIGINAL_SET["kappa"], param="alpha"))
        assert ks.pvalue > 0.01

    def test_mt_marginal(self):
        q = mt_params()
        times = 40.0 * np.arange(100_000)
        z = simulate_exceedances(q, times, 2).values
        pos = z[z > 0]
        ks = stats.kstest(pos, lambda v: gpd_cdf(np.minimum(v, upper_endpoint(q.xi, q.sigma)), q.xi, q.sigma))
        assert ks.pvalue > 0.01
        assert pos.max() < upper_endpoint(q.xi, q.sigma)
        n = len(times)
        assert abs(len(pos) / n - exceedance_prob(q)) <= 4 * math.sqrt(exceedance_prob(q) / n)

    def test_return_latent(self):
        s, lam = simulate_exceedances(orig_params(), np.arange(100.0), 3, return_latent=True)
        assert lam.shape == (100,)
        assert s.metadata["simulated"]["variant"] == "original"

    def test_reproducible(self):
        a = simulate_exceedances(mt_params(), np.arange(5000.0), 5).values
        b = simulate_exceedances(mt_params(), np.arange(5000.0), 5).values
        np.testing.assert_array_equal(a, b)


# --- moments -----------------------------------------------------------------------------


class TestMoments:
    def test_mean_examples(self):
        assert mean_exceedance(ModelParams.original(2.0, 1.0, rho=1.0, kappa=0.0)) == pytest.approx(1.0)
        a, b, k = ORIGINAL_SET["alpha"], ORIGINAL_SET["beta"], ORIGINAL_SET["kappa"]
        arithmetic = (1 + k / b) ** -a * (b + k) / (a - 1)
        assert mean_exceedance(orig_params()) == pytest.approx(arithmetic, rel=1e-13)
        assert mean_exceedance(orig_params()) == pytest.approx(0.3030, abs=5e-4)
        assert mean_exceedance(ModelParams.original(2.0, 1.0, rho=1.0, kappa=1e8)) < 1e-7

    def test_mean_undefined(self):
        with pytest.raises(ValueError):
            mean_exceedance(ModelParams.original(1.0, 1.0, rho=1.0, kappa=1.0))

    def test_mt_mean(self):
        q = mt_params()
        assert mean_exceedance(q) == pytest.approx(exceedance_prob(q) * q.sigma / (1 - q.xi), rel=1e-13)

    def test_second_moment(self):
        p = orig_params()
        a, s = ORIGINAL_SET["alpha"], ORIGINAL_SET["beta"] + ORIGINAL_SET["kappa"]
        assert second_moment_exceedance(p) == pytest.approx(exceedance_prob(p) * 2 * s**2 / ((a - 1) * (a - 2)))

    def test_acov_decays(self):
        h = np.array([0.5, 1, 2, 5, 10, 30, 100])
        c = acov_exceedance(orig_params(), h)
        assert np.all(np.diff(c) < 0)
        assert c[-1] < 1e-9

    def test_acov_quadrature_error(self):
        val, err = acov_exceedance(orig_params(), 1.0, return_error=True)
        assert err < 1e-6 and val == pytest.approx(0.2602783, rel=1e-5)

    def test_acf_discontinuous_at_zero(self):
        p = ModelParams.original(4.0, 4.0, rho=0.2, kappa=KAPPA_ALPHA4)
        r = acf_exceedance(p, np.array([1e-6, 1.0, 2.0, 5.0, 10.0]))
        assert r[0] < 1
        assert np.all(np.diff(r) < 0)

    def test_acov_errors(self):
        with pytest.raises(ValueError):
            acov_exceedance(ModelParams.original(2.0, 1.0, rho=1.0, kappa=1.0), 1.0)
        with pytest.raises(NotImplementedError):
            acov_exceedance(mt_params(), 1.0)
        with pytest.raises(ValueError):
            acov_exceedance(orig_params(), 0.0)


# --- joint survivor -------------------------------------------------------------------------


class TestJointSurvivor:
    def test_at_origin(self):
        p = orig_params()
        b0, b0h = slice_shapes(p, 1.0)
        k, b = ORIGINAL_SET["kappa"], ORIGINAL_SET["beta"]
        expected = (1 + k / b) ** (-2 * b0) * (1 + 2 * k / b) ** (-b0h)
        assert joint_exceedance_survivor(p, 1.0, 0.0, 0.0) == pytest.approx(expected, rel=1e-14)

    def test_independence_limit(self):
        p = orig_params()
        a, b, k = ORIGINAL_SET["alpha"], ORIGINAL_SET["beta"], ORIGINAL_SET["kappa"]
        marg = lambda x: (1 + (k + x) / b) ** -a
        assert joint_exceedance_survivor(p, 500.0, 2.0, 7.0) == pytest.approx(marg(2.0) * marg(7.0), rel=1e-12)

    @given(st.floats(0.01, 10.0), st.floats(0.0, 100.0), st.floats(0.0, 100.0))
    @settings(max_examples=60, deadline=None)
    def test_symmetry(self, h, x0, xh):
        p = orig_params()
        assert joint_exceedance_survivor(p, h, x0, xh) == pytest.approx(joint_exceedance_survivor(p, h, xh, x0), rel=1e-14)

    def test_errors(self):
        with pytest.raises(ValueError):
            joint_exceedance_survivor(orig_params(), 0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            joint_exceedance_survivor(orig_params(), 1.0, -1.0, 1.0)

    def test_monte_carlo(self):
        x = long_orig_path()
        p = orig_params()
        for x0, xh in [(0.0, 0.0), (3.0, 1.0), (8.0, 8.0)]:
            m, se = batch_mean_se((x[:-1] > x0) & (x[1:] > xh) & (x[:-1] > 0) & (x[1:] > 0))
            assert abs(m - joint_exceedance_survivor(p, 1.0, x0, xh)) <= 4 * se

    def test_mt_uses_latent_scale(self):
        q = mt_params()
        z0, zh = 5.0, 12.0
        x0 = inverse_transform_mt(z0, q.kappa, q.xi, q.sigma)
        xh = inverse_transform_mt(zh, q.kappa, q.xi, q.sigma)
        latent = ModelParams.original(1.0, 1.0, rho=q.rho, kappa=q.kappa)
        assert joint_exceedance_survivor(q, 2.0, z0, zh) == pytest.approx(
            joint_exceedance_survivor(latent, 2.0, x0, xh), rel=1e-13
        )
