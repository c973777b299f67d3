import math

import numpy as np
from django.test import SimpleTestCase, tag

from math_kernels.utils import beamformed_sum, make_rng, sample_cscg_vector
from scenario.models import LinkGains

from .models import ChannelRealization, TrainingObservation
from .utils import (
    phase1_observation,
    phase2_observation,
    pilot_training_matrix,
    project_training_matrix,
    sample_realization,
    unit_modulus_pilot,
)


def make_gains(num_aps=3, b=1.0, zeta=0.5, upsilon=0.2):
    return LinkGains.from_components([b] * num_aps, [zeta] * num_aps, upsilon)


def assert_variance_within(test, samples, expected, n_se=5):
    # per-entry |x|^2 of CN(0, v) is v*Exp(1): standard error v/sqrt(n)
    samples = np.ravel(samples)
    se = expected / math.sqrt(samples.size)
    test.assertLess(abs(np.mean(np.abs(samples) ** 2) - expected), n_se * se)


class SampleRealizationTests(SimpleTestCase):

    def test_shapes_and_cascade(self):
        realization = sample_realization(make_gains(), 4, make_rng(0))
        self.assertEqual(realization.g.shape, (3, 4))
        self.assertEqual(realization.f.shape, (3, 4))
        np.testing.assert_array_equal(realization.h, realization.q * realization.f)

    def test_fixed_seed_is_reproducible(self):
        a = sample_realization(make_gains(), 4, make_rng(12))
        b = sample_realization(make_gains(), 4, make_rng(12))
        np.testing.assert_array_equal(a.g, b.g)
        np.testing.assert_array_equal(a.h, b.h)
        self.assertEqual(a.q, b.q)

    def test_tiny_direct_gain_gives_tiny_channel(self):
        realization = sample_realization(make_gains(b=1e-30), 4, make_rng(1))
        self.assertLess(np.linalg.norm(realization.g), 1e-13)

    def test_entry_variances_follow_gains(self):
        gains = LinkGains.from_components([1.0, 4.0], [2.0, 0.5], 0.3)
        realization = sample_realization(gains, 50000, make_rng(2))
        for m in range(2):
            assert_variance_within(self, realization.g[m], gains.b[m])
            assert_variance_within(self, realization.f[m], gains.zeta[m])

    @tag('slow')
    def test_bd_link_power_matches_upsilon(self):
        gains = make_gains(num_aps=1, upsilon=0.7)
        rng = make_rng(3)
        q = np.array([sample_realization(gains, 1, rng).q for _ in range(100000)])
        assert_variance_within(self, q, 0.7)

    def test_cascade_factorizes_beamformed_sum(self):
        realization = sample_realization(make_gains(), 4, make_rng(4))
        weights = sample_cscg_vector((3, 4), 1.0, make_rng(5))
        lhs = beamformed_sum(realization.h, weights)
        rhs = np.conj(realization.q) * beamformed_sum(realization.f, weights)
        self.assertAlmostEqual(abs(lhs - rhs) / abs(lhs), 0.0, places=12)


class Phase1ObservationTests(SimpleTestCase):

    def test_noiseless_observation_is_scaled_channel(self):
        g = np.array([1 + 2j, -0.5j, 3.0])
        obs = phase1_observation(g, 7, 0.1, 0.0, make_rng(0))
        self.assertEqual(obs.phase, 1)
        np.testing.assert_array_equal(obs.y, 7 * g)

    def test_noise_variance(self):
        g = np.zeros(100000, dtype=complex)
        obs = phase1_observation(g, 5, 2.0, 0.4, make_rng(1))
        assert_variance_within(self, obs.y, 5 * 0.4 / 2.0)

    def test_pure_noise_single_pilot(self):
        obs = phase1_observation(np.zeros(100000), 1, 1.0, 3.0, make_rng(2))
        assert_variance_within(self, obs.y, 3.0)

    def test_rejects_invalid_training(self):
        with self.assertRaises(ValueError):
            phase1_observation(np.ones(2), 0, 1.0, 1.0, make_rng(0))
        with self.assertRaises(ValueError):
            phase1_observation(np.ones(2), 1, 0.0, 1.0, make_rng(0))

    def test_projection_matches_direct_synthesis(self):
        tau, p_t, sigma2 = 8, 2.0, 0.5
        n = 40000
        g = sample_cscg_vector(n, 1.0, make_rng(10))
        rng = make_rng(11)
        pilot = unit_modulus_pilot(tau, rng)
        self.assertAlmostEqual(np.vdot(pilot, pilot).real, tau)

        projected = project_training_matrix(pilot_training_matrix(g, pilot, p_t, sigma2, rng), pilot, p_t)
        direct = phase1_observation(g, tau, p_t, sigma2, rng)

        expected = tau * sigma2 / p_t
        projected_noise = projected.y - tau * g
        direct_noise = direct.y - tau * g
        se = expected / math.sqrt(n)
        self.assertLess(abs(np.mean(np.abs(projected_noise) ** 2) - np.mean(np.abs(direct_noise) ** 2)),
                        5 * math.sqrt(2) * se)
        assert_variance_within(self, projected_noise, expected)
        self.assertLess(abs(np.mean(projected_noise)), 5 * math.sqrt(expected / n))


class Phase2ObservationTests(SimpleTestCase):

    def test_ideal_second_phase(self):
        h = np.array([0.2 - 1j, 4.0])
        obs = phase2_observation(h, np.zeros(2), 9, 1.0, 0.0, 1.0, make_rng(0))
        self.assertEqual(obs.phase, 2)
        np.testing.assert_array_equal(obs.y, 9 * h)

    def test_residual_error_passthrough(self):
        g_err = np.array([1.5j, -2.0])
        obs = phase2_observation(np.zeros(2), g_err, 1, 1.0, 0.0, 1.0, make_rng(0))
        np.testing.assert_array_equal(obs.y, g_err)

    def test_error_scaled_by_reflection(self):
        g_err = np.array([1.0, 2.0])
        obs = phase2_observation(np.zeros(2), g_err, 3, 1.0, 0.0, 0.25, make_rng(0))
        np.testing.assert_allclose(obs.y, 3 / 0.5 * g_err)

    def test_noise_variance(self):
        zeros = np.zeros(100000, dtype=complex)
        obs = phase2_observation(zeros, zeros, 4, 0.5, 0.2, 0.8, make_rng(6))
        assert_variance_within(self, obs.y, 4 * 0.2 / (0.5 * 0.8))

    def test_rejects_zero_reflection(self):
        with self.assertRaises(ValueError):
            phase2_observation(np.ones(2), np.zeros(2), 1, 1.0, 1.0, 0.0, make_rng(0))

    def test_rejects_shape_mismatch(self):
        with self.assertRaises(ValueError):
            phase2_observation(np.ones(2), np.zeros(3), 1, 1.0, 1.0, 1.0, make_rng(0))


class ModelTests(SimpleTestCase):

    def test_realization_cascade_is_exact(self):
        f = np.array([[1 + 1j, 2.0]])
        realization = ChannelRealization.from_links(np.zeros((1, 2)), f, 0.5 - 0.25j)
        np.testing.assert_array_equal(realization.h, (0.5 - 0.25j) * f)
        self.assertEqual(realization.num_aps, 1)
        self.assertEqual(realization.antennas_per_ap, 2)

    def test_observation_rejects_bad_phase_and_non_finite(self):
        with self.assertRaises(ValueError):
            TrainingObservation(y=np.zeros(2), phase=3)
        with self.assertRaises(ValueError):
            TrainingObservation(y=np.array([np.nan]), phase=1)
