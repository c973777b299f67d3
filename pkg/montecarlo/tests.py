import math
from itertools import combinations
from unittest.mock import patch

import numpy as np
from django.test import SimpleTestCase, override_settings, tag
from scipy.integrate import quad

from channel.utils import sample_realization
from estimation.services import run_two_phase_estimation
from math_kernels.utils import make_rng
from scenario.models import ScenarioConfig
from scenario.utils import build_link_gains, grid_positions
from symrad.exceptions import CampaignError, ConfigError, DegenerateBeamformerError, TrialError

from .models import RateRegion
from .services import apply_sweep_value, resolve_workers, run_campaign, run_trial, sweep, trial_seed


def small_config(**overrides):
    values = dict(
        num_aps=4,
        ap_positions=grid_positions(2, 750),
        antennas_per_ap=2,
        num_trials=6,
        rho_grid=(0.0, 0.5, 1.0),
        seed=11,
    )
    values.update(overrides)
    return ScenarioConfig(**values)


def ergodic_by_quadrature(beta):
    value, _ = quad(lambda x: math.log2(1.0 + beta * x) * math.exp(-x), 0, np.inf, epsrel=1e-12)
    return value


class RunTrialTests(SimpleTestCase):

    def setUp(self):
        self.config = small_config()
        self.gains = build_link_gains(self.config)

    def test_trial_seed_mixes_index(self):
        self.assertEqual(trial_seed(11, 0), 11)
        self.assertEqual(trial_seed(11, 3), 8)

    def test_same_trial_is_deterministic(self):
        self.assertEqual(run_trial(self.config, self.gains, 2), run_trial(self.config, self.gains, 2))

    def test_trials_differ(self):
        self.assertNotEqual(run_trial(self.config, self.gains, 0), run_trial(self.config, self.gains, 1))

    def test_one_point_per_rho(self):
        points = run_trial(self.config.with_overrides(rho_grid=(0.4,)), self.gains, 0)
        self.assertEqual(len(points), 1)
        self.assertEqual(points[0].rho, 0.4)
        self.assertIsNone(points[0].empirical_primary)

    def test_single_antenna_chain_matches_hand_computation(self):
        config = ScenarioConfig(num_aps=1, antennas_per_ap=1, ap_positions=[(30.0, 40.0)],
                                rho_grid=(0.0, 0.5, 1.0), num_trials=1, seed=5)
        gains = build_link_gains(config)
        points = run_trial(config, gains, 3)

        rng = make_rng(5 ^ 3)
        realization = sample_realization(gains, 1, rng)
        est = run_two_phase_estimation(realization, gains, config, rng)
        b, eps, e1, e2, alpha = gains.b[0], gains.epsilon[0], config.e1, config.e2, config.alpha
        residual = b / (1 + e1 * b)
        error = residual + alpha * eps * (e2 * residual + 1) / (alpha * e2 * eps + e2 * residual + 1)
        error += config.noise_power / config.transmit_power
        g_hat = abs(est.g_hat[0, 0]) ** 2
        h_hat = abs(est.h_hat[0, 0]) ** 2
        p, sigma2 = config.transmit_power, config.noise_power
        g = abs(realization.g[0, 0]) ** 2
        backscatter = abs(realization.q) ** 2 * abs(realization.f[0, 0]) ** 2

        # a single antenna makes every unit beamformer a pure phase
        for point in points:
            self.assertAlmostEqual(point.bound.primary / math.log2(1 + g_hat / (error + alpha * h_hat)), 1.0, places=9)
            self.assertAlmostEqual(point.bound.secondary / ergodic_by_quadrature(alpha * h_hat / error), 1.0, places=7)
            sinr = p * g / (p * alpha * backscatter + sigma2)
            self.assertAlmostEqual(point.perfect.primary / math.log2(1 + sinr), 1.0, places=9)
            self.assertAlmostEqual(
                point.perfect.secondary / ergodic_by_quadrature(p * alpha * backscatter / sigma2), 1.0, places=7
            )

    def test_true_channel_beamforming_changes_perfect_rates_only(self):
        estimated = run_trial(self.config, self.gains, 4)
        true = run_trial(self.config.with_overrides(perfect_csi_beamforming='true'), self.gains, 4)
        self.assertEqual([p.bound for p in estimated], [p.bound for p in true])
        self.assertNotEqual([p.perfect for p in estimated], [p.perfect for p in true])

    def test_empirical_oracle_is_attached(self):
        points = run_trial(self.config.with_overrides(empirical_resamples=1000), self.gains, 0)
        self.assertTrue(all(point.empirical_primary is not None for point in points))


class RunCampaignTests(SimpleTestCase):

    def test_single_trial_region(self):
        config = small_config(num_trials=1)
        region = run_campaign(config, workers=1)
        points = run_trial(config, build_link_gains(config), 0)
        np.testing.assert_array_equal(region.mean_primary_bound, [p.bound.primary for p in points])
        np.testing.assert_array_equal(region.mean_secondary_perfect, [p.perfect.secondary for p in points])
        np.testing.assert_array_equal(region.stderr_primary_bound, 0.0)
        self.assertEqual(region.num_trials, 1)
        self.assertEqual(region.config_digest, config.digest())

    def test_first_trials_unchanged_when_trials_added(self):
        short = small_config(num_trials=3)
        long = small_config(num_trials=6)
        gains = build_link_gains(long)
        for index in range(3):
            self.assertEqual(run_trial(short, gains, index), run_trial(long, gains, index))
        region = run_campaign(short, workers=1)
        first = np.array([[p.bound.secondary for p in run_trial(long, gains, i)] for i in range(3)])
        np.testing.assert_allclose(region.mean_secondary_bound, first.mean(axis=0), rtol=1e-15)

    def test_worker_count_does_not_change_values(self):
        config = small_config(num_trials=10)
        self.assertTrue(run_campaign(config, workers=1).same_values(run_campaign(config, workers=2)))

    def test_repeated_campaigns_are_identical(self):
        config = small_config()
        self.assertTrue(run_campaign(config, workers=1).same_values(run_campaign(config, workers=1)))

    def test_standard_errors_are_non_negative(self):
        region = run_campaign(small_config(), workers=1)
        for name in ('stderr_primary_bound', 'stderr_secondary_bound',
                     'stderr_primary_perfect', 'stderr_secondary_perfect'):
            self.assertTrue(np.all(getattr(region, name) >= 0))

    def test_failed_trials_fail_the_campaign(self):
        with patch('montecarlo.services.build_beamformer_set',
                   side_effect=DegenerateBeamformerError("zero estimate", ap_index=0)):
            with self.assertLogs('montecarlo', level='ERROR'):
                with self.assertRaises(CampaignError) as ctx:
                    run_campaign(small_config(num_trials=3), workers=1)
        self.assertEqual(len(ctx.exception.failures), 3)
        self.assertIn('rho=0.0', ctx.exception.failures[0])

    def test_zero_reflection_is_a_config_error(self):
        with self.assertRaises(ConfigError) as ctx:
            run_campaign(small_config(alpha=0.0), workers=1)
        self.assertEqual(ctx.exception.key, 'alpha')

    def test_untrainable_trial_reports_its_index(self):
        config = small_config(alpha=0.0)
        with self.assertRaises(TrialError) as ctx:
            run_trial(config, build_link_gains(config), 4)
        self.assertEqual(ctx.exception.trial_index, 4)
        self.assertIsNone(ctx.exception.rho)
        self.assertIsInstance(ctx.exception.cause, ValueError)

    def test_optional_series(self):
        region = run_campaign(small_config(num_trials=2, frame_length=400, empirical_resamples=1000), workers=1)
        self.assertTrue(region.has_empirical)
        self.assertEqual(len(region.mean_primary_empirical), 3)
        self.assertAlmostEqual(region.throughput_factor, 0.5)

    def test_region_rejects_mismatched_series(self):
        with self.assertRaises(ValueError):
            RateRegion(rho_grid=(0.0, 1.0), mean_primary_bound=np.zeros(1), mean_secondary_bound=np.zeros(2),
                       mean_primary_perfect=np.zeros(2), mean_secondary_perfect=np.zeros(2),
                       stderr_primary_bound=np.zeros(2), stderr_secondary_bound=np.zeros(2),
                       stderr_primary_perfect=np.zeros(2), stderr_secondary_perfect=np.zeros(2),
                       num_trials=1, config_digest='x')


class WorkerResolutionTests(SimpleTestCase):

    @override_settings(SYMRAD_WORKERS=3)
    def test_setting_is_the_fallback(self):
        self.assertEqual(resolve_workers(), 3)
        self.assertEqual(resolve_workers(2), 2)

    def test_rejects_zero(self):
        with self.assertRaises(ConfigError):
            resolve_workers(0)


class SweepTests(SimpleTestCase):

    def test_one_labelled_region_per_value(self):
        regions = sweep(small_config(num_trials=2), 'tau1', ['1', '10', '100'], workers=1)
        self.assertEqual([r.sweep_value for r in regions], [1, 10, 100])
        self.assertEqual({r.sweep_param for r in regions}, {'tau1'})
        self.assertEqual(len({r.config_digest for r in regions}), 3)

    def test_aliases_share_a_label(self):
        self.assertEqual(sweep(small_config(num_trials=1), 'num_aps', [4], workers=1)[0].sweep_param, 'M')

    def test_unknown_parameter(self):
        with self.assertRaises(ConfigError):
            sweep(small_config(), 'wavelength', [0.1])

    def test_empty_values(self):
        with self.assertRaises(ConfigError):
            sweep(small_config(), 'tau2', [])

    def test_zero_reflection_rejected_before_any_campaign(self):
        with patch('montecarlo.services.run_campaign') as campaign:
            with self.assertRaises(ConfigError) as ctx:
                sweep(small_config(), 'alpha', [0.5, 0.0, 1.0], workers=1)
        self.assertEqual(ctx.exception.key, 'alpha')
        campaign.assert_not_called()

    def test_non_square_ap_count(self):
        with self.assertRaises(ConfigError):
            sweep(small_config(), 'M', [5])

    def test_fractional_training_length(self):
        with self.assertRaises(ConfigError):
            sweep(small_config(), 'tau1', [2.5])

    def test_snr_sets_both_powers(self):
        swept = apply_sweep_value(ScenarioConfig(), 'snr_db', 120.0)
        self.assertAlmostEqual(swept.transmit_power / 1e-2, 1.0, places=12)
        self.assertEqual(swept.training_power, swept.transmit_power)

    def test_ap_count_regenerates_grid(self):
        swept = apply_sweep_value(ScenarioConfig(), 'num_aps', 9)
        self.assertEqual(len(swept.ap_positions), 9)
        self.assertIn((0.0, 0.0), swept.ap_positions)


@tag('slow')
class RateRegionShapeTests(SimpleTestCase):
    """Qualitative shape of the reference deployment's rate regions.

    Every campaign shares the base seed, so trial k of one sweep value sees
    the same channel draw as trial k of any other.
    """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        base = ScenarioConfig(num_trials=200)
        lengths = (1, 10, 100)
        cls.by_tau1 = dict(zip(lengths, sweep(base, 'tau1', lengths, workers=1)))
        cls.by_tau2 = dict(zip(lengths, sweep(base, 'tau2', lengths, workers=1)))

    def assert_above(self, high, low, series, index):
        gap = getattr(high, f'mean_{series}')[index] - getattr(low, f'mean_{series}')[index]
        noise = math.hypot(getattr(high, f'stderr_{series}')[index], getattr(low, f'stderr_{series}')[index])
        self.assertGreater(gap, 3 * noise, msg=f"{series} at rho={high.rho_grid[index]}")

    def test_cascaded_steering_lifts_secondary_rate(self):
        region = self.by_tau1[100]
        self.assertGreater(region.mean_secondary_bound[0], 10 * region.mean_secondary_bound[-1])

    def test_single_pilot_first_phase_starves_secondary_rate(self):
        short, long = self.by_tau1[1], self.by_tau1[100]
        self.assertTrue(np.all(short.mean_secondary_bound <= 0.05 * long.mean_secondary_bound[0]))

    def test_first_phase_training_enlarges_region(self):
        for low, high in ((1, 10), (10, 100)):
            for index in (0, 5):
                self.assert_above(self.by_tau1[high], self.by_tau1[low], 'secondary_bound', index)
                self.assert_above(self.by_tau1[high], self.by_tau1[low], 'primary_bound', index)

    def test_max_primary_rate_ignores_second_phase_length(self):
        values = [self.by_tau2[tau2].mean_primary_bound[-1] for tau2 in (1, 10, 100)]
        self.assertLess((max(values) - min(values)) / max(values), 0.05)

    def test_second_phase_training_lifts_secondary_rate(self):
        for low, high in ((1, 10), (10, 100)):
            self.assert_above(self.by_tau2[high], self.by_tau2[low], 'secondary_bound', 0)

    def test_min_primary_rate_flat_in_second_phase_length(self):
        # BD-path interference sits orders of magnitude below the error-plus-noise floor
        for a, b in combinations((self.by_tau2[tau2] for tau2 in (1, 10, 100)), 2):
            gap = abs(a.mean_primary_bound[0] - b.mean_primary_bound[0])
            noise = math.hypot(a.stderr_primary_bound[0], b.stderr_primary_bound[0])
            self.assertLess(gap, 4 * noise)

    def test_first_phase_budget_beats_second_phase_budget(self):
        for short in (1, 10):
            first_heavy = self.by_tau2[short]
            second_heavy = self.by_tau1[short]
            self.assertEqual((first_heavy.sweep_param, second_heavy.sweep_param), ('tau2', 'tau1'))
            self.assert_above(first_heavy, second_heavy, 'primary_bound', 0)
            self.assert_above(first_heavy, second_heavy, 'secondary_bound', 0)
