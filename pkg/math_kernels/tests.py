import math

import numpy as np
from django.test import SimpleTestCase, tag
from scipy.integrate import quad
from scipy.special import exp1

from .utils import (
    beamformed_sum,
    ergodic_rayleigh_rate,
    exp_scaled_e1,
    make_rng,
    sample_cscg_vector,
)


def quadrature_rate(beta):
    value, _ = quad(
        lambda x: math.log2(1.0 + beta * x) * math.exp(-x),
        0, np.inf, epsabs=0.0, epsrel=1e-12, limit=500,
    )
    return value


class SampleCscgVectorTests(SimpleTestCase):

    def test_zero_variance_gives_zero_vector(self):
        out = sample_cscg_vector(3, 0.0, make_rng(1))
        self.assertEqual(out.shape, (3,))
        self.assertTrue(np.all(out == 0))

    def test_same_seed_same_output(self):
        a = sample_cscg_vector(2, 2.0, make_rng(42))
        b = sample_cscg_vector(2, 2.0, make_rng(42))
        np.testing.assert_array_equal(a, b)

    def test_rejects_bad_arguments(self):
        rng = make_rng(0)
        with self.assertRaises(ValueError):
            sample_cscg_vector(0, 1.0, rng)
        with self.assertRaises(ValueError):
            sample_cscg_vector(3, -1.0, rng)

    def test_per_row_variances_broadcast(self):
        out = sample_cscg_vector((2, 50000), np.array([[1.0], [4.0]]), make_rng(3))
        power = np.mean(np.abs(out) ** 2, axis=1)
        np.testing.assert_allclose(power, [1.0, 4.0], rtol=0.03)

    @tag('slow')
    def test_mean_power_matches_variance(self):
        out = sample_cscg_vector((250000, 4), 1.0, make_rng(7))
        self.assertAlmostEqual(np.mean(np.abs(out) ** 2), 1.0, delta=0.01)

    @tag('slow')
    def test_covariance_is_scaled_identity(self):
        variance = 2.0
        n = 100000
        draws = sample_cscg_vector((n, 3), variance, make_rng(11))
        cov = draws.T @ draws.conj() / n
        # |x|^2 ~ variance * Exp(1): stderr of the diagonal is variance/sqrt(n)
        diag_se = variance / math.sqrt(n)
        offdiag_se = variance / math.sqrt(n)
        for i in range(3):
            self.assertLess(abs(cov[i, i].real - variance), 5 * diag_se)
            for j in range(3):
                if i != j:
                    self.assertLess(abs(cov[i, j]), 5 * offdiag_se)

    def test_real_and_imaginary_parts_split_variance(self):
        draws = sample_cscg_vector(200000, 2.0, make_rng(5))
        self.assertAlmostEqual(np.var(draws.real), 1.0, delta=0.02)
        self.assertAlmostEqual(np.var(draws.imag), 1.0, delta=0.02)


class ExpScaledE1Tests(SimpleTestCase):

    def test_reference_values(self):
        self.assertAlmostEqual(exp_scaled_e1(1.0), 0.596347, places=6)
        self.assertAlmostEqual(exp_scaled_e1(0.1), 2.014643, places=5)

    def test_matches_scipy_exp1(self):
        for x in np.logspace(-4, 2.5, 60):
            expected = math.exp(x) * exp1(x)
            self.assertLess(abs(exp_scaled_e1(x) - expected) / expected, 1e-10, msg=f"x={x}")

    def test_branches_agree_at_seam(self):
        below = exp_scaled_e1(1.0)
        above = exp_scaled_e1(math.nextafter(1.0, 2.0))
        self.assertLess(abs(below - above) / below, 1e-10)

    def test_large_argument_asymptotics(self):
        for x in (1e3, 1e6, 1e12):
            value = exp_scaled_e1(x)
            self.assertGreater(value, 0.0)
            self.assertAlmostEqual(x * value, 1.0, delta=2.0 / x)

    def test_rejects_non_positive_and_non_finite(self):
        for bad in (0.0, -1.0, math.inf, math.nan):
            with self.assertRaises(ValueError):
                exp_scaled_e1(bad)


class ErgodicRayleighRateTests(SimpleTestCase):

    def test_zero_snr_gives_zero_rate(self):
        self.assertEqual(ergodic_rayleigh_rate(0.0), 0.0)

    def test_reference_values(self):
        self.assertAlmostEqual(ergodic_rayleigh_rate(1.0), 0.86034, places=5)
        self.assertAlmostEqual(ergodic_rayleigh_rate(10.0), 2.9065, places=3)

    def test_rejects_negative_and_non_finite(self):
        for bad in (-1e-9, math.inf, math.nan):
            with self.assertRaises(ValueError):
                ergodic_rayleigh_rate(bad)

    def test_tiny_snr_does_not_overflow(self):
        rate = ergodic_rayleigh_rate(1e-6)
        self.assertGreater(rate, 0.0)
        self.assertAlmostEqual(rate / (1e-6 * math.log2(math.e)), 1.0, places=4)

    def test_strictly_increasing(self):
        grid = np.logspace(-3, 3, 61)
        rates = [ergodic_rayleigh_rate(beta) for beta in grid]
        self.assertTrue(all(b > a for a, b in zip(rates, rates[1:])))

    def test_below_jensen_ceiling(self):
        for beta in np.logspace(-3, 3, 61):
            self.assertLessEqual(ergodic_rayleigh_rate(beta), math.log2(1.0 + beta))

    @tag('slow')
    def test_matches_quadrature(self):
        for beta in np.logspace(-3, 3, 1000):
            expected = quadrature_rate(beta)
            self.assertLess(abs(ergodic_rayleigh_rate(beta) - expected) / expected, 1e-8, msg=f"beta={beta}")

    def test_matches_quadrature_on_random_points(self):
        rng = make_rng(2024)
        for beta in 10 ** rng.uniform(-3, 3, size=40):
            expected = quadrature_rate(beta)
            self.assertLess(abs(ergodic_rayleigh_rate(beta) - expected) / expected, 1e-8, msg=f"beta={beta}")


class BeamformedSumTests(SimpleTestCase):

    def test_identity(self):
        self.assertEqual(beamformed_sum([[1, 0]], [[1, 0]]), 1 + 0j)

    def test_first_argument_is_conjugated(self):
        self.assertEqual(beamformed_sum([[1j, 0]], [[1, 0]]), -1j)

    def test_sums_over_aps(self):
        self.assertEqual(beamformed_sum([[1], [2]], [[1], [1]]), 3 + 0j)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            beamformed_sum([[1, 0]], [[1, 0, 0]])
        with self.assertRaises(ValueError):
            beamformed_sum([[1], [2]], [[1]])
