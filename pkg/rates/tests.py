import math

import numpy as np
from django.test import SimpleTestCase, tag
from scipy.integrate import quad

from beamforming.models import BeamformerSet
from beamforming.utils import build_beamformer_set
from channel.models import ChannelRealization
from channel.utils import sample_realization
from estimation.models import ChannelEstimate
from estimation.services import run_two_phase_estimation
from math_kernels.utils import make_rng
from scenario.models import LinkGains, ScenarioConfig

from .models import NoiseErrorTerm, RatePair
from .utils import (
    effective_throughput,
    empirical_primary_rate,
    empirical_secondary_rate,
    error_noise_power,
    noise_error_term,
    primary_rate_bound,
    primary_rate_perfect,
    primary_rate_samples,
    primary_sinr_perfect,
    secondary_rate_bound,
    secondary_rate_perfect,
    secondary_rate_samples,
)

UNIT = np.array([[1.0 + 0j]])


def scalar_realization(g=1.0, f=1.0, q=1.0):
    return ChannelRealization.from_links([[g]], [[f]], q)


def make_estimate(g_hat, h_hat, var_g=0.0, var_h=0.0):
    g_hat = np.atleast_2d(np.asarray(g_hat, dtype=complex))
    h_hat = np.atleast_2d(np.asarray(h_hat, dtype=complex))
    num_aps = g_hat.shape[0]
    return ChannelEstimate(
        g_hat=g_hat, h_hat=h_hat, g_err=np.zeros_like(g_hat), h_err=np.zeros_like(h_hat),
        var_g_err=np.full(num_aps, var_g), var_h_err=np.full(num_aps, var_h), e1=1.0, e2=1.0,
    )


def unit_beamformer():
    return BeamformerSet(w=UNIT, rho=1.0)


def line_config(num_aps, **overrides):
    values = dict(
        num_aps=num_aps,
        ap_positions=[(100.0 * (m + 1), 50.0) for m in range(num_aps)],
        transmit_power=1.0,
        training_power=1.0,
        noise_power=1.0,
        tau1=4,
        tau2=4,
    )
    values.update(overrides)
    return ScenarioConfig(**values)


def random_case(rng):
    num_aps = int(rng.integers(1, 5))
    antennas = int(rng.integers(1, 5))
    gains = LinkGains.from_components(
        10 ** rng.uniform(-0.5, 0.5, num_aps), 10 ** rng.uniform(-0.5, 0.5, num_aps), rng.uniform(0.5, 2.0)
    )
    config = line_config(
        num_aps,
        transmit_power=10 ** rng.uniform(0.0, 1.0),
        noise_power=rng.uniform(0.5, 2.0),
        tau1=int(rng.integers(1, 5)),
        tau2=int(rng.integers(1, 5)),
        alpha=rng.uniform(0.2, 1.0),
    )
    realization = sample_realization(gains, antennas, rng)
    est = run_two_phase_estimation(realization, gains, config, rng)
    bf = build_beamformer_set(est, float(rng.choice([0.0, 0.3, 0.5, 0.8, 1.0])))
    return gains, config, est, bf


class PerfectCsiRateTests(SimpleTestCase):

    def test_primary_sinr_scalar_case(self):
        self.assertEqual(primary_sinr_perfect(scalar_realization(), UNIT, 1.0, 1.0, 1.0), 0.5)

    def test_primary_sinr_without_backscatter(self):
        realization = ChannelRealization.from_links([[1.0, 1j]], [[2.0, 2.0]], 0.7)
        w = np.array([[1.0, 1j]]) / math.sqrt(2)
        expected = 3.0 * abs(np.vdot(realization.g, w)) ** 2 / 0.5
        self.assertAlmostEqual(primary_sinr_perfect(realization, w, 3.0, 0.0, 0.5), expected, places=12)

    def test_orthogonal_beamformer_gives_zero(self):
        realization = ChannelRealization.from_links([[1.0, 0.0]], [[1.0, 1.0]], 1.0)
        self.assertEqual(primary_sinr_perfect(realization, np.array([[0.0, 1.0]]), 1.0, 1.0, 1.0), 0.0)

    def test_primary_rate_values(self):
        self.assertEqual(primary_rate_perfect(0.0), 0.0)
        self.assertEqual(primary_rate_perfect(1.0), 1.0)
        self.assertEqual(primary_rate_perfect(3.0), 2.0)
        with self.assertRaises(ValueError):
            primary_rate_perfect(-0.1)

    def test_secondary_rate_values(self):
        self.assertAlmostEqual(secondary_rate_perfect(scalar_realization(), UNIT, 1.0, 1.0, 1.0), 0.86034, places=5)
        self.assertEqual(secondary_rate_perfect(scalar_realization(), UNIT, 1.0, 0.0, 1.0), 0.0)
        self.assertEqual(secondary_rate_perfect(scalar_realization(q=0.0), UNIT, 1.0, 1.0, 1.0), 0.0)


class NoiseErrorTermTests(SimpleTestCase):

    def test_hand_sum(self):
        self.assertAlmostEqual(error_noise_power(1.0, 1.0, 4.0, 4.0, 1.0, 1.0), 0.2 + 1.8 / 5.8 + 1.0, places=14)

    def test_from_gains_and_config(self):
        gains = LinkGains.from_components([1.0], [1.0], 1.0)
        term = noise_error_term(gains, line_config(1))
        self.assertAlmostEqual(term.power, 1.510345, places=6)

    def test_perfect_csi_limit(self):
        self.assertAlmostEqual(error_noise_power([1.0, 2.0], [0.5, 0.1], 1e15, 1e15, 1.0, 0.25), 0.25, places=12)

    def test_no_backscatter_drops_cascaded_term(self):
        value = error_noise_power([1.0, 3.0], [0.5, 0.5], 4.0, 4.0, 0.0, 1.0)
        self.assertAlmostEqual(value, 1 / 5 + 3 / 13 + 1.0, places=14)

    def test_term_must_be_positive(self):
        with self.assertRaises(ValueError):
            NoiseErrorTerm(0.0)


class RateBoundTests(SimpleTestCase):

    def test_primary_bound_scalar_case(self):
        rate = primary_rate_bound(make_estimate(1.0, 1.0), unit_beamformer(), NoiseErrorTerm(1.0), 1.0)
        self.assertAlmostEqual(rate, math.log2(1.5), places=15)

    def test_primary_bound_zero_estimate(self):
        self.assertEqual(primary_rate_bound(make_estimate(0.0, 1.0), unit_beamformer(), NoiseErrorTerm(1.0), 1.0), 0.0)

    def test_primary_bound_matches_perfect_without_backscatter(self):
        g = np.array([[0.3 + 0.4j, -1.0]])
        realization = ChannelRealization.from_links(g, [[1.0, 1.0]], 1.0)
        bf = BeamformerSet(w=g / np.linalg.norm(g), rho=1.0)
        p, sigma2 = 2.0, 0.5
        bound = primary_rate_bound(make_estimate(g, [[1.0, 1.0]]), bf, NoiseErrorTerm(sigma2 / p), 0.0)
        perfect = primary_rate_perfect(primary_sinr_perfect(realization, bf.w, p, 0.0, sigma2))
        self.assertAlmostEqual(bound, perfect, places=12)

    def test_secondary_bound_values(self):
        self.assertAlmostEqual(
            secondary_rate_bound(make_estimate(1.0, 1.0), unit_beamformer(), NoiseErrorTerm(1.0), 1.0), 0.86034,
            places=5,
        )
        self.assertEqual(
            secondary_rate_bound(make_estimate(1.0, 0.0), unit_beamformer(), NoiseErrorTerm(1.0), 1.0), 0.0
        )
        self.assertAlmostEqual(
            secondary_rate_bound(make_estimate(1.0, 1.0), unit_beamformer(), NoiseErrorTerm(1e300), 1.0), 0.0,
            places=12,
        )

    def test_bounds_converge_to_perfect_rates_at_high_enr(self):
        gains = LinkGains.from_components([1.0, 0.6], [0.8, 1.2], 0.9)
        config = line_config(2, tau1=10 ** 10, tau2=10 ** 10)
        realization = sample_realization(gains, 3, make_rng(10))
        est = run_two_phase_estimation(realization, gains, config, make_rng(11))
        term = noise_error_term(gains, config)
        p, alpha, sigma2 = config.transmit_power, config.alpha, config.noise_power
        for rho in (0.0, 0.5, 1.0):
            bf = build_beamformer_set(est, rho)
            primary = primary_rate_perfect(primary_sinr_perfect(realization, bf.w, p, alpha, sigma2))
            secondary = secondary_rate_perfect(realization, bf.w, p, alpha, sigma2)
            self.assertLess(abs(primary_rate_bound(est, bf, term, alpha) - primary) / primary, 1e-3)
            self.assertLess(abs(secondary_rate_bound(est, bf, term, alpha) - secondary) / secondary, 1e-3)


class EmpiricalRateTests(SimpleTestCase):

    def test_requires_enough_resamples(self):
        with self.assertRaises(ValueError):
            empirical_primary_rate(make_estimate(1.0, 1.0), unit_beamformer(), line_config(1), make_rng(0), 999)

    def test_empirical_mean_matches_samples(self):
        est = make_estimate(1.0, 0.5, var_g=0.3, var_h=0.2)
        config = line_config(1)
        rate = empirical_primary_rate(est, unit_beamformer(), config, make_rng(7), 2000)
        samples = primary_rate_samples(est, unit_beamformer(), config, make_rng(7), 2000)
        self.assertEqual(rate, float(np.mean(samples)))

    def test_zero_error_variance_is_deterministic(self):
        config = line_config(1, transmit_power=2.0)
        est = make_estimate(1.0 + 1j, 0.5)
        samples = primary_rate_samples(est, unit_beamformer(), config, make_rng(1), 1000)
        expected = math.log2(1.0 + 2.0 / (0.25 + 0.5))
        np.testing.assert_allclose(samples, expected, rtol=1e-14)

    def test_single_ap_matches_quadrature(self):
        # equal error powers: the error term is Gamma(2, v) distributed
        v, signal, floor = 0.5, 4.0, 1.0 + 1.0
        config = line_config(1)
        est = make_estimate(2.0, 1.0, var_g=v, var_h=v)
        samples = primary_rate_samples(est, unit_beamformer(), config, make_rng(2), 20000)
        expected, _ = quad(lambda t: math.log2(1.0 + signal / (v * t + floor)) * t * math.exp(-t), 0, np.inf)
        se = samples.std() / math.sqrt(samples.size)
        self.assertLess(abs(samples.mean() - expected), 5 * se)

    def test_primary_bound_holds(self):
        rng = make_rng(3)
        for _ in range(25):
            gains, config, est, bf = random_case(rng)
            bound = primary_rate_bound(est, bf, noise_error_term(gains, config), config.alpha)
            samples = primary_rate_samples(est, bf, config, rng, 4000)
            se = samples.std() / math.sqrt(samples.size)
            self.assertGreaterEqual(samples.mean(), bound - 3 * se)

    @tag('slow')
    def test_primary_bound_holds_on_many_configurations(self):
        rng = make_rng(4)
        for _ in range(100):
            gains, config, est, bf = random_case(rng)
            bound = primary_rate_bound(est, bf, noise_error_term(gains, config), config.alpha)
            samples = primary_rate_samples(est, bf, config, rng, 20000)
            self.assertGreaterEqual(samples.mean(), bound - 5 * samples.std() / math.sqrt(samples.size))

    def test_secondary_bound_holds(self):
        rng = make_rng(5)
        for _ in range(10):
            gains, config, est, bf = random_case(rng)
            bound = secondary_rate_bound(est, bf, noise_error_term(gains, config), config.alpha)
            samples = secondary_rate_samples(est, bf, config, rng, 20000)
            se = samples.std() / math.sqrt(samples.size)
            self.assertGreaterEqual(samples.mean(), bound - 3 * se)

    def test_secondary_oracle_averages_symbol_power(self):
        config = line_config(1)
        est = make_estimate(1.0, 1.0)
        rate = empirical_secondary_rate(est, unit_beamformer(), config, make_rng(6), 200000)
        self.assertAlmostEqual(rate, 0.86034, delta=0.01)


class ModelAndThroughputTests(SimpleTestCase):

    def test_rate_pair_rejects_negative(self):
        with self.assertRaises(ValueError):
            RatePair(primary=-1.0, secondary=0.0)
        with self.assertRaises(ValueError):
            RatePair(primary=1.0, secondary=math.nan)

    def test_effective_throughput(self):
        self.assertEqual(effective_throughput(2.0, 0.5), 1.0)
        with self.assertRaises(ValueError):
            effective_throughput(2.0, 1.5)
