import numpy as np
import pytest
from scipy.stats import norm

from onebitnet import (ExponentialModel, GaussianModel, cumulant_check,
                       quantize, quantize_array)

LOG5 = np.log(5.0)


class TestGaussianModel:
    def test_moment_readoffs(self, gauss1):
        assert gauss1.mean(1) == 1.0
        assert gauss1.mean(0) == -1.0
        assert gauss1.variance(0) == gauss1.variance(1) == 2.0

    def test_marginal_probabilities_rho1(self, gauss1):
        # p_d = Phi(sqrt(rho/2)) and the symmetric identity p_d = 1 - p_f
        assert abs(gauss1.p_d - 0.76) < 0.005
        np.testing.assert_allclose(gauss1.p_d, 1.0 - gauss1.p_f, atol=1e-15)
        np.testing.assert_allclose(gauss1.p_d, norm.cdf(np.sqrt(0.5)), atol=1e-12)

    def test_marginal_probability_rho2(self):
        model = GaussianModel(2.0)
        np.testing.assert_allclose(model.p_d, norm.cdf(1.0), atol=1e-12)
        rng = np.random.default_rng(0)
        x = model.sample(1, rng, 10 ** 6)
        se = np.sqrt(model.p_d * (1 - model.p_d) / len(x))
        assert abs(np.mean(x >= 0) - model.p_d) < 4 * se

    def test_log_cf_is_quadratic(self, gauss1):
        t = np.linspace(-3, 3, 7)
        expected = 1j * t * 1.0 - t * t * 1.0
        np.testing.assert_allclose(gauss1.log_cf(t, 1), expected, atol=1e-15)
        assert all(gauss1.phi_coeff(n, 0) == 0 for n in range(3, 9))
        assert gauss1.radius(0) == np.inf

    def test_invalid_rho(self):
        with pytest.raises(ValueError):
            GaussianModel(0.0)


class TestExponentialModel:
    def test_moments_lambda5(self, expo5):
        np.testing.assert_allclose(expo5.mean(0), 0.8 - LOG5, atol=1e-14)
        np.testing.assert_allclose(expo5.mean(1), 4.0 - LOG5, atol=1e-14)
        np.testing.assert_allclose(expo5.mean(0), -0.80944, atol=5e-6)
        np.testing.assert_allclose(expo5.mean(1), 2.39056, atol=5e-6)
        assert expo5.variance(0) == pytest.approx(0.64, abs=1e-14)
        # variance consistent with the H1 density / log-CF: (lambda_e - 1)^2
        assert expo5.variance(1) == pytest.approx(16.0, abs=1e-12)

    def test_marginal_probabilities(self, expo5):
        np.testing.assert_allclose(expo5.p_f, 5.0 ** -1.25, atol=1e-15)
        np.testing.assert_allclose(expo5.p_d, 5.0 ** -0.25, atol=1e-15)
        assert abs((1 - expo5.p_f) - 0.87) < 0.005
        assert abs(expo5.p_d - 0.67) < 0.005

    def test_probabilities_match_density_integrals(self, expo5):
        # independent oracle: integrate the shifted-exponential densities
        from scipy.integrate import quad
        for h, scale, expected in ((0, 0.8, expo5.p_f), (1, 4.0, expo5.p_d)):
            def density(x):
                return np.exp(-(x + LOG5) / scale) / scale
            val, err = quad(density, 0, np.inf)
            np.testing.assert_allclose(val, expected, atol=1e-10)

    def test_radii_and_support(self, expo5):
        assert expo5.radius(0) == pytest.approx(1.25)
        assert expo5.radius(1) == pytest.approx(0.25)
        assert expo5.support_lower(0) == pytest.approx(-LOG5)

    def test_coefficients(self, expo5):
        np.testing.assert_allclose(expo5.phi_coeff(2, 0), -0.32, atol=1e-15)
        np.testing.assert_allclose(expo5.phi_coeff(3, 1), (4j) ** 3 / 3, atol=1e-12)
        np.testing.assert_allclose(expo5.phi_coeffs(4, 1),
                                   [expo5.phi_coeff(n, 1) for n in range(1, 5)])

    def test_coefficient_root_test(self, expo5):
        # |phi_n|^(1/n) approaches 1/radius for large n
        for h in (0, 1):
            n = 400
            root = abs(expo5.phi_coeff(n, h)) ** (1.0 / n)
            np.testing.assert_allclose(root, 1.0 / expo5.radius(h), rtol=0.02)

    def test_sampling_moments(self, expo5):
        rng = np.random.default_rng(1)
        for h in (0, 1):
            x = expo5.sample(h, rng, 10 ** 6)
            se_mean = np.sqrt(expo5.variance(h) / len(x))
            assert abs(x.mean() - expo5.mean(h)) < 4 * se_mean
            assert abs(x.var() / expo5.variance(h) - 1) < 0.01
            assert x.min() >= -LOG5

    def test_bit_rates(self, expo5):
        rng = np.random.default_rng(2)
        for h, p in ((0, expo5.p_f), (1, expo5.p_d)):
            x = expo5.sample(h, rng, 10 ** 6)
            se = np.sqrt(p * (1 - p) / len(x))
            assert abs(np.mean(x >= 0) - p) < 4 * se

    def test_llr_shift_property(self, expo5):
        # log-CF under H1 equals the H0 log-CF shifted by -j
        t = np.linspace(-0.2, 0.2, 9)
        np.testing.assert_allclose(expo5.log_cf(t, 1),
                                   expo5.log_cf(t - 1j, 0), atol=1e-12)

    def test_invalid_lambda(self):
        with pytest.raises(ValueError):
            ExponentialModel(1.0)


class TestQuantizer:
    def test_gaussian_positive(self, gauss1):
        msg = quantize(0.3, gauss1)
        assert msg.value == 1.0 and msg.bit == +1

    def test_gaussian_negative(self, gauss1):
        msg = quantize(-0.3, gauss1)
        assert msg.value == -1.0 and msg.bit == -1

    def test_exponential_negative(self, expo5):
        msg = quantize(-1.0, expo5)
        np.testing.assert_allclose(msg.value, 0.8 - LOG5, atol=1e-14)
        assert msg.bit == -1

    def test_bit_value_consistency(self, gauss1, expo5):
        for model in (gauss1, expo5):
            e0, e1 = model.message_values()
            for x in (-2.0, -0.1, 0.0, 0.4, 3.0):
                msg = quantize(x, model)
                assert (msg.bit == +1) == (msg.value == e1)
                # normalized symbol definition
                b = (2 * msg.value - (e1 + e0)) / (e1 - e0)
                np.testing.assert_allclose(b, msg.bit, atol=1e-12)

    def test_vectorized_matches_scalar(self, expo5):
        xs = np.linspace(-2, 2, 11)
        vals = quantize_array(xs, expo5)
        for x, v in zip(xs, vals):
            assert v == quantize(x, expo5).value

    def test_empirical_rates(self, gauss1):
        rng = np.random.default_rng(3)
        for h, p in ((0, gauss1.p_f), (1, gauss1.p_d)):
            x = gauss1.sample(h, rng, 10 ** 6)
            bits = quantize_array(x, gauss1) == gauss1.mean(1)
            se = np.sqrt(p * (1 - p) / len(x))
            assert abs(bits.mean() - p) < 4 * se


class TestCumulantCheck:
    def test_gaussian_first_coefficient(self, gauss1):
        res = cumulant_check(gauss1, 1, n_max=1)
        assert res[0] < 1e-10

    def test_all_models_small_residuals(self, gauss1, expo5):
        for model in (gauss1, expo5):
            for h in (0, 1):
                res = cumulant_check(model, h, n_max=6)
                assert np.all(res < 1e-6)

    def test_first_two_are_cumulants(self, gauss1, expo5):
        for model in (gauss1, expo5):
            for h in (0, 1):
                np.testing.assert_allclose(model.phi_coeff(1, h),
                                           1j * model.mean(h), atol=1e-13)
                np.testing.assert_allclose(model.phi_coeff(2, h),
                                           -model.variance(h) / 2, atol=1e-13)

    def test_n_max_limit(self, gauss1):
        with pytest.raises(ValueError):
            cumulant_check(gauss1, 0, n_max=7)
