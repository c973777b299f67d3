import math

import numpy as np
from django.test import SimpleTestCase

from estimation.models import ChannelEstimate
from math_kernels.utils import beamformed_sum, make_rng, sample_cscg_vector
from symrad.exceptions import AntiparallelBeamformerError, DegenerateBeamformerError

from .models import BeamformerSet
from .utils import build_beamformer_set, mrt, true_channel_beamformer_set, weighted_mrt

RHO_GRID = [k / 10 for k in range(11)]


def make_estimate(g_hat, h_hat):
    g_hat = np.asarray(g_hat, dtype=complex)
    h_hat = np.asarray(h_hat, dtype=complex)
    zeros = np.zeros_like(g_hat)
    ones = np.ones(g_hat.shape[0])
    return ChannelEstimate(g_hat=g_hat, h_hat=h_hat, g_err=zeros, h_err=zeros,
                           var_g_err=ones, var_h_err=ones, e1=1.0, e2=1.0)


def random_estimate(num_aps=4, antennas=3, seed=0):
    rng = make_rng(seed)
    return make_estimate(sample_cscg_vector((num_aps, antennas), 1.0, rng),
                         sample_cscg_vector((num_aps, antennas), 1.0, rng))


class MrtTests(SimpleTestCase):

    def test_three_four_five(self):
        np.testing.assert_allclose(mrt([3, 4j]), [0.6, 0.8j], rtol=1e-15)

    def test_unit_vector_is_fixed_point(self):
        v = np.array([1j, 0.0])
        np.testing.assert_array_equal(mrt(v), v)

    def test_positive_scale_invariance(self):
        v = np.array([1 - 2j, 0.5, 3j])
        np.testing.assert_allclose(mrt(7.5 * v), mrt(v), rtol=1e-14)

    def test_zero_vector_is_rejected(self):
        with self.assertRaises(DegenerateBeamformerError):
            mrt([0.0, 0.0])

    def test_zero_row_names_ap(self):
        with self.assertRaises(DegenerateBeamformerError) as ctx:
            mrt([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
        self.assertEqual(ctx.exception.ap_index, 1)
        self.assertIn('AP 1', str(ctx.exception))


class WeightedMrtTests(SimpleTestCase):

    def test_endpoints_are_exact(self):
        w_s = mrt([1 + 1j, 2.0])
        w_c = mrt([0.5, -1j])
        np.testing.assert_array_equal(weighted_mrt(w_s, w_c, 1.0), w_s)
        np.testing.assert_array_equal(weighted_mrt(w_s, w_c, 0.0), w_c)

    def test_orthogonal_midpoint(self):
        out = weighted_mrt([1.0, 0.0], [0.0, 1.0], 0.5)
        np.testing.assert_allclose(out, [1 / math.sqrt(2), 1 / math.sqrt(2)], rtol=1e-15)

    def test_antiparallel_is_distinct_error(self):
        with self.assertRaises(AntiparallelBeamformerError):
            weighted_mrt([1.0, 0.0], [-1.0, 0.0], 0.5)

    def test_rejects_rho_out_of_range(self):
        with self.assertRaises(ValueError):
            weighted_mrt([1.0], [1.0], 1.5)

    def test_unit_norm_over_grid(self):
        est = random_estimate(num_aps=6, antennas=4, seed=3)
        for rho in RHO_GRID:
            norms = np.linalg.norm(build_beamformer_set(est, rho).w, axis=1)
            np.testing.assert_allclose(norms, 1.0, atol=1e-12)


class BuildBeamformerSetTests(SimpleTestCase):

    def test_full_weight_is_direct_mrt(self):
        est = random_estimate(seed=1)
        w = build_beamformer_set(est, 1.0).w
        np.testing.assert_array_equal(w, est.g_hat / np.linalg.norm(est.g_hat, axis=1, keepdims=True))

    def test_collinear_estimates_ignore_rho(self):
        g_hat = sample_cscg_vector((3, 4), 1.0, make_rng(2))
        est = make_estimate(g_hat, 2.5 * g_hat)
        reference = build_beamformer_set(est, 1.0).w
        for rho in RHO_GRID:
            np.testing.assert_allclose(build_beamformer_set(est, rho).w, reference, rtol=1e-12, atol=1e-15)

    def test_hand_computed_pair(self):
        est = make_estimate([[3.0, 4j], [0.0, 2.0]], [[1.0, 0.0], [0.0, -1j]])
        w = build_beamformer_set(est, 0.5).w
        np.testing.assert_allclose(w[0], [0.8 / math.sqrt(0.8), 0.4j / math.sqrt(0.8)], rtol=1e-14)
        np.testing.assert_allclose(w[1], [0.0, (1 - 1j) / math.sqrt(2)], rtol=1e-14, atol=1e-16)

    def test_each_ap_uses_only_its_own_estimates(self):
        est = random_estimate(seed=4)
        before = build_beamformer_set(est, 0.3).w
        g_hat = est.g_hat.copy()
        h_hat = est.h_hat.copy()
        g_hat[1:] *= -3.0 + 1j
        h_hat[2] = sample_cscg_vector(3, 5.0, make_rng(9))
        after = build_beamformer_set(make_estimate(g_hat, h_hat), 0.3).w
        np.testing.assert_array_equal(after[0], before[0])

    def test_triangle_inequality_extremes(self):
        est = random_estimate(num_aps=5, seed=5)
        direct = [abs(beamformed_sum(est.g_hat, build_beamformer_set(est, rho).w)) for rho in RHO_GRID]
        cascaded = [abs(beamformed_sum(est.h_hat, build_beamformer_set(est, rho).w)) for rho in RHO_GRID]

        direct_ceiling = np.sum(np.linalg.norm(est.g_hat, axis=1))
        cascaded_ceiling = np.sum(np.linalg.norm(est.h_hat, axis=1))
        self.assertAlmostEqual(direct[-1], direct_ceiling, delta=1e-10)
        self.assertAlmostEqual(cascaded[0], cascaded_ceiling, delta=1e-10)
        self.assertTrue(all(value <= direct_ceiling + 1e-10 for value in direct))
        self.assertTrue(all(value <= cascaded_ceiling + 1e-10 for value in cascaded))

    def test_degenerate_ap_is_reported(self):
        g_hat = np.ones((3, 2), dtype=complex)
        g_hat[2] = 0.0
        with self.assertRaises(DegenerateBeamformerError) as ctx:
            build_beamformer_set(make_estimate(g_hat, np.ones((3, 2))), 0.5)
        self.assertEqual(ctx.exception.ap_index, 2)

    def test_true_channel_set(self):
        class Realization:
            g = np.array([[0.0, 2.0]])
            h = np.array([[1j, 0.0]])

        w = true_channel_beamformer_set(Realization, 0.0).w
        np.testing.assert_array_equal(w, [[1j, 0.0]])

    def test_set_rejects_non_unit_rows(self):
        with self.assertRaises(ValueError):
            BeamformerSet(w=np.array([[1.0, 1.0]]), rho=0.5)
