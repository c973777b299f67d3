import math

import numpy as np
from django.test import SimpleTestCase

from estimation.services import training_enr
from symrad.exceptions import ConfigError

from .models import LinkGains, ScenarioConfig
from .serializers import ScenarioConfigSerializer
from .utils import build_link_gains, grid_positions, path_loss, reference_gain

WAVELENGTH = 0.0857


class GridPositionsTests(SimpleTestCase):

    def test_reference_grid(self):
        points = grid_positions(4, 750)
        self.assertEqual(len(points), 16)
        xs = sorted({x for x, _ in points})
        ys = sorted({y for _, y in points})
        self.assertEqual(xs, [-375.0, -125.0, 125.0, 375.0])
        self.assertEqual(ys, [-375.0, -125.0, 125.0, 375.0])

    def test_single_point_is_centred(self):
        self.assertEqual(grid_positions(1, 100), [(0.0, 0.0)])

    def test_row_major_order(self):
        points = grid_positions(2, 4)
        self.assertEqual(points, [(-2.0, -2.0), (2.0, -2.0), (-2.0, 2.0), (2.0, 2.0)])

    def test_symmetric_under_axis_negation(self):
        points = set(grid_positions(4, 750))
        self.assertEqual(points, {(-x, y) for x, y in points})
        self.assertEqual(points, {(x, -y) for x, y in points})

    def test_rejects_bad_arguments(self):
        with self.assertRaises(ValueError):
            grid_positions(0, 100)
        with self.assertRaises(ValueError):
            grid_positions(2, 0)


class PathLossTests(SimpleTestCase):

    def test_reference_gain_at_one_metre(self):
        self.assertAlmostEqual(path_loss(1.0, 2.7, WAVELENGTH) / 4.6510e-5, 1.0, places=4)

    def test_bd_to_receiver_gain(self):
        expected = reference_gain(WAVELENGTH) * 5.0 ** -2.1
        self.assertEqual(path_loss(5.0, 2.1, WAVELENGTH), expected)
        self.assertAlmostEqual(expected / 1.5838e-6, 1.0, places=3)

    def test_gain_scales_with_wavelength_squared(self):
        ratio = path_loss(30.0, 2.7, WAVELENGTH) / path_loss(30.0, 2.7, 2 * WAVELENGTH)
        self.assertAlmostEqual(ratio, 0.25, places=15)

    def test_strictly_decreasing_in_distance(self):
        gains = [path_loss(d, 2.7, WAVELENGTH) for d in (1.0, 2.0, 10.0, 100.0, 1000.0)]
        self.assertTrue(all(b < a for a, b in zip(gains, gains[1:])))

    def test_rejects_zero_distance(self):
        with self.assertRaises(ValueError):
            path_loss(0.0, 2.7, WAVELENGTH)


class BuildLinkGainsTests(SimpleTestCase):

    def test_default_scenario(self):
        config = ScenarioConfig()
        gains = build_link_gains(config)
        self.assertEqual(gains.num_aps, 16)
        self.assertEqual(gains.upsilon, path_loss(5.0, 2.1, WAVELENGTH))
        np.testing.assert_array_equal(gains.epsilon, gains.upsilon * gains.zeta)

    def test_single_ap(self):
        config = ScenarioConfig(num_aps=1, ap_positions=[(125.0, 125.0)])
        gains = build_link_gains(config)
        expected = reference_gain(WAVELENGTH) * math.hypot(120.0, 125.0) ** -2.7
        self.assertAlmostEqual(gains.b[0] / expected, 1.0, places=12)

    def test_equidistant_nodes_have_equal_gains(self):
        # receiver and BD mirrored about the y axis; APs on the y axis
        config = ScenarioConfig(
            num_aps=2,
            ap_positions=[(0.0, 40.0), (0.0, -70.0)],
            receiver_position=(3.0, 0.0),
            bd_position=(-3.0, 0.0),
        )
        gains = build_link_gains(config)
        np.testing.assert_allclose(gains.b, gains.zeta, rtol=1e-15)

    def test_link_gains_reject_non_positive(self):
        with self.assertRaises(ValueError):
            LinkGains.from_components([1.0, 0.0], [1.0, 1.0], 1.0)


class ScenarioConfigTests(SimpleTestCase):

    def test_defaults(self):
        config = ScenarioConfig()
        self.assertEqual(config.num_aps, 16)
        self.assertEqual(len(config.rho_grid), 11)
        self.assertAlmostEqual(10 * math.log10(config.transmit_power / config.noise_power), 130.0)
        self.assertEqual(config.e1, config.training_power * config.tau1 / config.noise_power)

    def test_training_enrs_follow_phase_lengths(self):
        config = ScenarioConfig(tau1=7, tau2=30, training_power=2.0, noise_power=0.5)
        self.assertEqual(config.e1, training_enr(2.0, 7, 0.5))
        self.assertEqual(config.e2, training_enr(2.0, 30, 0.5))
        self.assertAlmostEqual(config.e2 / config.e1, 30 / 7)

    def test_rejects_ap_on_receiver(self):
        with self.assertRaises(ConfigError) as ctx:
            ScenarioConfig(num_aps=1, ap_positions=[(5.0, 0.0)])
        self.assertEqual(ctx.exception.key, 'ap_positions')

    def test_rejects_position_count_mismatch(self):
        with self.assertRaises(ConfigError):
            ScenarioConfig(num_aps=3)

    def test_rejects_out_of_range_rho(self):
        with self.assertRaises(ConfigError) as ctx:
            ScenarioConfig(rho_grid=(0.0, 1.2))
        self.assertEqual(ctx.exception.key, 'rho_grid')

    def test_frame_length_must_cover_training(self):
        with self.assertRaises(ConfigError):
            ScenarioConfig(frame_length=200)
        self.assertAlmostEqual(ScenarioConfig(frame_length=400).throughput_factor, 0.5)

    def test_digest_is_stable_and_sensitive(self):
        self.assertEqual(ScenarioConfig().digest(), ScenarioConfig().digest())
        self.assertNotEqual(ScenarioConfig().digest(), ScenarioConfig(seed=1).digest())

    def test_overrides_are_revalidated(self):
        with self.assertRaises(ConfigError):
            ScenarioConfig().with_overrides(alpha=2.0)


class ScenarioConfigSerializerTests(SimpleTestCase):

    def load(self, payload):
        serializer = ScenarioConfigSerializer(data=payload)
        serializer.is_valid(raise_exception=True)
        return serializer.save()

    def test_empty_object_gives_defaults(self):
        self.assertEqual(self.load({}), ScenarioConfig())

    def test_overrides(self):
        config = self.load({'num_trials': 10, 'seed': 7})
        self.assertEqual(config, ScenarioConfig(num_trials=10, seed=7))

    def test_alpha_out_of_range_names_key(self):
        serializer = ScenarioConfigSerializer(data={'alpha': 1.5})
        self.assertFalse(serializer.is_valid())
        self.assertIn('alpha', serializer.errors)

    def test_invariant_failure_names_key(self):
        serializer = ScenarioConfigSerializer(data={'ap_positions': [[0.0, 0.0]]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('ap_positions', serializer.errors)

    def test_negative_power_names_key(self):
        serializer = ScenarioConfigSerializer(data={'noise_power': -1.0})
        self.assertFalse(serializer.is_valid())
        self.assertIn('noise_power', serializer.errors)

    def test_num_aps_override_regenerates_grid(self):
        config = self.load({'num_aps': 4})
        self.assertEqual(sorted(config.ap_positions), [(-375.0, -375.0), (-375.0, 375.0),
                                                       (375.0, -375.0), (375.0, 375.0)])
        serializer = ScenarioConfigSerializer(data={'num_aps': 5})
        self.assertFalse(serializer.is_valid())
        self.assertIn('num_aps', serializer.errors)

    def test_round_trip(self):
        config = ScenarioConfig(num_trials=12, seed=99, tau1=10, frame_length=500, rho_grid=(0.0, 0.5, 1.0))
        payload = ScenarioConfigSerializer(config).data
        self.assertEqual(self.load(dict(payload)), config)
