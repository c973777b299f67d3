import math

import numpy as np
from django.test import SimpleTestCase, tag

from channel.models import TrainingObservation
from channel.utils import phase1_observation, phase2_observation, sample_realization
from math_kernels.utils import make_rng, sample_cscg_vector
from scenario.models import LinkGains, ScenarioConfig
from scenario.utils import build_link_gains

from .services import (
    cascaded_coefficient,
    cascaded_error_variance,
    cascaded_estimate_variance,
    direct_error_variance,
    direct_estimate_variance,
    estimate_cascaded,
    estimate_direct,
    lmmse_estimate,
    run_two_phase_estimation,
    training_enr,
)


def empirical_power(samples):
    """Mean |x|^2 and its standard error."""
    power = np.abs(np.ravel(samples)) ** 2
    return power.mean(), power.std() / math.sqrt(power.size)


def unit_scenario(**overrides):
    values = dict(
        num_aps=2,
        ap_positions=[(100.0, 0.0), (-100.0, 0.0)],
        training_power=1.0,
        noise_power=1.0,
        tau1=4,
        tau2=4,
    )
    values.update(overrides)
    return ScenarioConfig(**values)


class DirectEstimatorTests(SimpleTestCase):

    def test_hand_computed_value(self):
        obs = TrainingObservation(y=np.array([5.0, 0.0]), phase=1)
        np.testing.assert_allclose(estimate_direct(obs, 1.0, 4, 1.0, 1.0), [1.0, 0.0])

    def test_strong_prior_inverts_pilot_gain(self):
        obs = TrainingObservation(y=np.array([8.0 + 4j]), phase=1)
        np.testing.assert_allclose(estimate_direct(obs, 1e12, 4, 1.0, 1.0), [2.0 + 1j], rtol=1e-10)

    def test_vanishing_prior_gives_zero(self):
        obs = TrainingObservation(y=np.array([3.0, -1j]), phase=1)
        self.assertLess(np.max(np.abs(estimate_direct(obs, 1e-300, 4, 1.0, 1.0))), 1e-290)

    def test_rejects_phase_two_observation(self):
        obs = TrainingObservation(y=np.zeros(2), phase=2)
        with self.assertRaises(ValueError):
            estimate_direct(obs, 1.0, 4, 1.0, 1.0)

    def test_per_ap_coefficients_broadcast(self):
        obs = TrainingObservation(y=np.ones((2, 3)), phase=1)
        out = estimate_direct(obs, np.array([1.0, 3.0]), 1, 1.0, 1.0)
        np.testing.assert_allclose(out[0], 0.5)
        np.testing.assert_allclose(out[1], 0.75)

    def test_matches_matrix_lmmse_on_diagonal_covariances(self):
        b, tau1, p_t, sigma2, n = 0.7, 6, 2.0, 0.3, 4
        y = sample_cscg_vector(n, 1.0, make_rng(8))
        cross = tau1 * b * np.eye(n)
        observed = (tau1 ** 2 * b + tau1 * sigma2 / p_t) * np.eye(n)
        obs = TrainingObservation(y=y, phase=1)
        np.testing.assert_allclose(estimate_direct(obs, b, tau1, p_t, sigma2),
                                   lmmse_estimate(cross, observed, y), rtol=1e-12)


class DirectVarianceTests(SimpleTestCase):

    def test_reference_values(self):
        self.assertEqual(direct_error_variance(1.0, 0.0), 1.0)
        self.assertAlmostEqual(direct_error_variance(1.0, 4.0), 0.2, places=15)
        self.assertAlmostEqual(direct_estimate_variance(1.0, 4.0), 0.8, places=15)
        self.assertEqual(direct_estimate_variance(1.0, 0.0), 0.0)
        self.assertEqual(direct_error_variance(1.0, math.inf), 0.0)

    def test_decomposition(self):
        rng = make_rng(1)
        for b, e1 in zip(10 ** rng.uniform(-12, 2, 200), 10 ** rng.uniform(-3, 15, 200)):
            total = direct_estimate_variance(b, e1) + direct_error_variance(b, e1)
            self.assertLess(abs(total - b) / b, 1e-12)

    def test_error_decreases_with_enr(self):
        values = [direct_error_variance(2.0, e1) for e1 in np.logspace(-3, 6, 40)]
        self.assertTrue(all(b < a for a, b in zip(values, values[1:])))

    def test_training_enr(self):
        self.assertAlmostEqual(training_enr(0.1, 100, 1e-14), 1e15, delta=1.0)


class CascadedEstimatorTests(SimpleTestCase):

    def test_hand_value_without_phase_one_error(self):
        obs = TrainingObservation(y=np.array([5.0, 0.0]), phase=2)
        out = estimate_cascaded(obs, 1.0, 1.0, math.inf, 4, 1.0, 1.0, 1.0)
        np.testing.assert_allclose(out, [1.0, 0.0])

    def test_coefficient_with_phase_one_error(self):
        self.assertAlmostEqual(cascaded_coefficient(1.0, 1.0, 4.0, 4, 1.0, 1.0, 1.0), 1 / 5.8, places=15)

    def test_vanishing_prior_gives_zero(self):
        obs = TrainingObservation(y=np.array([5.0]), phase=2)
        self.assertLess(abs(estimate_cascaded(obs, 1e-300, 1.0, 4.0, 4, 1.0, 1.0, 1.0)[0]), 1e-290)

    def test_rejects_zero_reflection_and_wrong_phase(self):
        with self.assertRaises(ValueError):
            estimate_cascaded(TrainingObservation(y=np.ones(1), phase=2), 1.0, 1.0, 4.0, 4, 1.0, 1.0, 0.0)
        with self.assertRaises(ValueError):
            estimate_cascaded(TrainingObservation(y=np.ones(1), phase=1), 1.0, 1.0, 4.0, 4, 1.0, 1.0, 1.0)


class CascadedVarianceTests(SimpleTestCase):

    def test_reference_values(self):
        self.assertAlmostEqual(cascaded_error_variance(1.0, 1.0, 4.0, 4.0, 1.0), 1.8 / 5.8, places=14)
        self.assertAlmostEqual(cascaded_estimate_variance(1.0, 1.0, 4.0, 4.0, 1.0), 4.0 / 5.8, places=14)

    def test_no_phase_two_training_leaves_prior(self):
        self.assertEqual(cascaded_error_variance(0.3, 2.0, 5.0, 0.0, 0.5), 0.3)

    def test_perfect_phase_one_reduces_to_direct_form(self):
        eps, e2, alpha = 0.4, 7.0, 0.6
        self.assertAlmostEqual(cascaded_error_variance(eps, 1.0, math.inf, e2, alpha),
                               eps / (1 + alpha * e2 * eps), places=15)

    def test_phase_one_error_floor(self):
        eps, b, e1, alpha = 0.5, 2.0, 3.0, 0.8
        residual = direct_error_variance(b, e1)
        expected = alpha * eps ** 2 / (alpha * eps + residual)
        value = cascaded_estimate_variance(eps, b, e1, 1e14, alpha)
        self.assertLess(abs(value - expected) / expected, 1e-9)
        self.assertLess(value, eps)

    def test_decomposition(self):
        rng = make_rng(2)
        for _ in range(200):
            eps, b = 10 ** rng.uniform(-12, 1, 2)
            e1, e2 = 10 ** rng.uniform(-3, 15, 2)
            alpha = rng.uniform(0.01, 1.0)
            total = cascaded_estimate_variance(eps, b, e1, e2, alpha) + cascaded_error_variance(eps, b, e1, e2, alpha)
            self.assertLess(abs(total - eps) / eps, 1e-12)

    def test_monotonicity(self):
        by_e2 = [cascaded_error_variance(1.0, 1.0, 4.0, e2, 0.7) for e2 in np.logspace(-3, 6, 40)]
        self.assertTrue(all(b < a for a, b in zip(by_e2, by_e2[1:])))
        by_e1 = [cascaded_error_variance(1.0, 1.0, e1, 4.0, 0.7) for e1 in np.logspace(-3, 6, 40)]
        self.assertTrue(all(b <= a for a, b in zip(by_e1, by_e1[1:])))

    def test_coefficient_reproduces_estimate_variance(self):
        rng = make_rng(3)
        for _ in range(50):
            eps, b = 10 ** rng.uniform(-3, 1, 2)
            tau1, tau2 = rng.integers(1, 200, 2)
            p_t, sigma2 = 10 ** rng.uniform(-2, 1, 2)
            alpha = rng.uniform(0.05, 1.0)
            e1, e2 = training_enr(p_t, tau1, sigma2), training_enr(p_t, tau2, sigma2)
            residual = direct_error_variance(b, e1)
            observed = tau2 ** 2 * eps + tau2 ** 2 / alpha * residual + tau2 * sigma2 / (p_t * alpha)
            coefficient = cascaded_coefficient(eps, b, e1, tau2, p_t, sigma2, alpha)
            expected = cascaded_estimate_variance(eps, b, e1, e2, alpha)
            self.assertLess(abs(coefficient ** 2 * observed - expected) / expected, 1e-10)


class EstimationStatisticsTests(SimpleTestCase):
    n = 100000

    def direct_trial(self, b=1.0, tau1=4, p_t=1.0, sigma2=1.0, seed=0):
        rng = make_rng(seed)
        g = sample_cscg_vector(self.n, b, rng)
        g_hat = estimate_direct(phase1_observation(g, tau1, p_t, sigma2, rng), b, tau1, p_t, sigma2)
        return g, g_hat, g - g_hat

    def test_direct_error_variance_matches_closed_form(self):
        _, _, g_err = self.direct_trial()
        mean, se = empirical_power(g_err)
        self.assertLess(abs(mean - direct_error_variance(1.0, 4.0)), 5 * se)

    def test_cascaded_error_variance_matches_closed_form(self):
        rng = make_rng(4)
        _, _, g_err = self.direct_trial(seed=5)
        # independent q per draw so the ensemble spans trials, not one BD link
        h = sample_cscg_vector(self.n, 1.0, rng) * sample_cscg_vector(self.n, 1.0, rng)
        obs = phase2_observation(h, g_err, 4, 1.0, 1.0, 1.0, rng)
        h_err = h - estimate_cascaded(obs, 1.0, 1.0, 4.0, 4, 1.0, 1.0, 1.0)
        mean, se = empirical_power(h_err)
        self.assertLess(abs(mean - cascaded_error_variance(1.0, 1.0, 4.0, 4.0, 1.0)), 5 * se)

    @tag('slow')
    def test_estimate_and_error_are_uncorrelated(self):
        _, g_hat, g_err = self.direct_trial(b=2.0, seed=6)
        product = g_hat * np.conj(g_err)
        se = math.sqrt(np.mean(np.abs(product) ** 2) / product.size)
        self.assertLess(abs(np.mean(product)), 5 * se)


class ReferenceDeploymentStatisticsTests(SimpleTestCase):
    """Per-AP second moments at the reference gains with tau1 = tau2 = 10."""

    n = 100000

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        config = ScenarioConfig(tau1=10, tau2=10)
        gains = build_link_gains(config)
        p_t, sigma2 = config.training_power, config.noise_power
        rng = make_rng(2024)
        shape = (gains.num_aps, cls.n)
        g = sample_cscg_vector(shape, gains.b[:, None], rng)
        f = sample_cscg_vector(shape, gains.zeta[:, None], rng)
        # one BD link per column so the ensemble spans trials
        h = sample_cscg_vector(cls.n, gains.upsilon, rng)[None, :] * f

        g_hat = estimate_direct(phase1_observation(g, 10, p_t, sigma2, rng), gains.b, 10, p_t, sigma2)
        g_err = g - g_hat
        obs = phase2_observation(h, g_err, 10, p_t, sigma2, 1.0, rng)
        h_hat = estimate_cascaded(obs, gains.epsilon, gains.b, config.e1, 10, p_t, sigma2, 1.0)

        cls.config, cls.gains = config, gains
        cls.g_hat, cls.g_err = g_hat, g_err
        cls.h_hat, cls.h_err = h_hat, h - h_hat

    def assert_powers(self, samples, expected):
        for m in range(self.gains.num_aps):
            mean, se = empirical_power(samples[m])
            self.assertLess(abs(mean - expected[m]), 5 * se, msg=f"AP {m}")

    def test_direct_estimate_variance(self):
        self.assert_powers(self.g_hat, direct_estimate_variance(self.gains.b, self.config.e1))

    def test_direct_error_variance(self):
        self.assert_powers(self.g_err, direct_error_variance(self.gains.b, self.config.e1))

    def test_cascaded_estimate_variance(self):
        expected = cascaded_estimate_variance(self.gains.epsilon, self.gains.b, self.config.e1, self.config.e2, 1.0)
        self.assert_powers(self.h_hat, expected)

    def test_cascaded_error_variance(self):
        expected = cascaded_error_variance(self.gains.epsilon, self.gains.b, self.config.e1, self.config.e2, 1.0)
        self.assert_powers(self.h_err, expected)

    def test_direct_estimate_and_error_are_uncorrelated(self):
        for m in range(self.gains.num_aps):
            product = self.g_hat[m] * np.conj(self.g_err[m])
            se = math.sqrt(np.mean(np.abs(product) ** 2) / product.size)
            self.assertLess(abs(np.mean(product)), 5 * se, msg=f"AP {m}")


class RunTwoPhaseEstimationTests(SimpleTestCase):

    def setUp(self):
        self.gains = LinkGains.from_components([1.0, 2.0], [1.0, 0.5], 0.8)

    def test_estimates_and_errors_recompose_channels(self):
        config = unit_scenario()
        realization = sample_realization(self.gains, 3, make_rng(0))
        est = run_two_phase_estimation(realization, self.gains, config, make_rng(1))
        self.assertEqual(est.g_hat.shape, (2, 3))
        np.testing.assert_allclose(est.g_hat + est.g_err, realization.g, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(est.h_hat + est.h_err, realization.h, rtol=1e-12, atol=1e-15)
        self.assertEqual((est.e1, est.e2), (config.e1, config.e2))
        np.testing.assert_allclose(est.var_g_err, direct_error_variance(self.gains.b, 4.0))
        np.testing.assert_allclose(
            est.var_h_err, cascaded_error_variance(self.gains.epsilon, self.gains.b, 4.0, 4.0, 1.0)
        )

    def test_perfect_csi_limit(self):
        config = unit_scenario(noise_power=1e-18, tau1=1, tau2=1)
        realization = sample_realization(self.gains, 4, make_rng(2))
        est = run_two_phase_estimation(realization, self.gains, config, make_rng(3))
        self.assertLess(np.linalg.norm(est.g_hat - realization.g) / np.linalg.norm(realization.g), 1e-6)
        self.assertLess(np.linalg.norm(est.h_hat - realization.h) / np.linalg.norm(realization.h), 1e-6)

    def test_zero_reflection_is_rejected(self):
        config = unit_scenario(alpha=0.0)
        realization = sample_realization(self.gains, 2, make_rng(4))
        with self.assertRaises(ValueError):
            run_two_phase_estimation(realization, self.gains, config, make_rng(5))

    def test_same_seed_same_estimate(self):
        config = unit_scenario()
        realization = sample_realization(self.gains, 2, make_rng(6))
        a = run_two_phase_estimation(realization, self.gains, config, make_rng(7))
        b = run_two_phase_estimation(realization, self.gains, config, make_rng(7))
        np.testing.assert_array_equal(a.h_hat, b.h_hat)
