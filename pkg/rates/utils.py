"""Achievable rates: exact perfect-CSI expressions, Jensen lower bounds under
imperfect CSI, and resampling oracles for those bounds.

All rates are in bits per channel use (log base 2).
"""

import math

import numpy as np

from estimation.services import cascaded_error_variance, direct_error_variance
from math_kernels.utils import beamformed_sum, ergodic_rayleigh_rate, sample_cscg_vector

from .models import NoiseErrorTerm

MIN_RESAMPLES = 1000


def primary_sinr_perfect(realization, weights, p, alpha, sigma2):
    """p|sum g^H w|^2 / (p alpha |q|^2 |sum f^H w|^2 + sigma^2)."""
    signal = abs(beamformed_sum(realization.g, weights)) ** 2
    backscatter = abs(realization.q) ** 2 * abs(beamformed_sum(realization.f, weights)) ** 2
    return p * signal / (p * alpha * backscatter + sigma2)


def primary_rate_perfect(sinr):
    if sinr < 0:
        raise ValueError(f"SINR must be non-negative, got {sinr}")
    return math.log2(1.0 + sinr)


def secondary_snr_perfect(realization, weights, p, alpha, sigma2):
    return p * alpha * abs(realization.q) ** 2 * abs(beamformed_sum(realization.f, weights)) ** 2 / sigma2


def secondary_rate_perfect(realization, weights, p, alpha, sigma2):
    return ergodic_rayleigh_rate(secondary_snr_perfect(realization, weights, p, alpha, sigma2))


def error_noise_power(b, eps, e1, e2, alpha, noise_to_power):
    """Sum over APs of the direct and alpha-weighted cascaded error variances, plus sigma^2/p."""
    b = np.asarray(b, dtype=float)
    eps = np.asarray(eps, dtype=float)
    per_ap = direct_error_variance(b, e1) + alpha * cascaded_error_variance(eps, b, e1, e2, alpha)
    return float(np.sum(per_ap)) + noise_to_power


def noise_error_term(gains, config):
    return NoiseErrorTerm(error_noise_power(
        gains.b, gains.epsilon, config.e1, config.e2, config.alpha, config.noise_to_power,
    ))


def primary_rate_bound(est, bf, error_term, alpha):
    """log2(1 + |sum g_hat^H w|^2 / (E + alpha |sum h_hat^H w|^2))."""
    signal = abs(beamformed_sum(est.g_hat, bf.w)) ** 2
    interference = alpha * abs(beamformed_sum(est.h_hat, bf.w)) ** 2
    return math.log2(1.0 + signal / (error_term.power + interference))


def secondary_snr_bound(est, bf, error_term, alpha):
    return alpha * abs(beamformed_sum(est.h_hat, bf.w)) ** 2 / error_term.power


def secondary_rate_bound(est, bf, error_term, alpha):
    return ergodic_rayleigh_rate(secondary_snr_bound(est, bf, error_term, alpha))


def _resampled_error_powers(est, bf, alpha, rng, n_resamples):
    """Redraw g_err and h_err around the fixed estimates; return |sum w^H g_err|^2 + alpha |sum w^H h_err|^2 per draw."""
    if n_resamples < MIN_RESAMPLES:
        raise ValueError(f"n_resamples must be at least {MIN_RESAMPLES}, got {n_resamples}")
    shape = (n_resamples,) + est.g_hat.shape
    var_g = np.asarray(est.var_g_err, dtype=float)[:, None]
    var_h = np.asarray(est.var_h_err, dtype=float)[:, None]
    g_err = sample_cscg_vector(shape, var_g, rng)
    h_err = sample_cscg_vector(shape, var_h, rng)
    # full double sum over AP pairs, cross terms included
    direct = np.einsum('kmn,mn->k', g_err.conj(), bf.w)
    cascaded = np.einsum('kmn,mn->k', h_err.conj(), bf.w)
    return np.abs(direct) ** 2 + alpha * np.abs(cascaded) ** 2


def primary_rate_samples(est, bf, config, rng, n_resamples):
    """Per-draw log2(1 + gamma_s) with the estimation errors resampled."""
    alpha = config.alpha
    signal = abs(beamformed_sum(est.g_hat, bf.w)) ** 2
    interference = alpha * abs(beamformed_sum(est.h_hat, bf.w)) ** 2
    errors = _resampled_error_powers(est, bf, alpha, rng, n_resamples)
    return np.log2(1.0 + signal / (errors + interference + config.noise_to_power))


def empirical_primary_rate(est, bf, config, rng, n_resamples):
    return float(np.mean(primary_rate_samples(est, bf, config, rng, n_resamples)))


def secondary_rate_samples(est, bf, config, rng, n_resamples):
    """Per-draw log2(1 + gamma_c) with errors resampled and |s|^2 ~ Exp(1)."""
    alpha = config.alpha
    signal = alpha * abs(beamformed_sum(est.h_hat, bf.w)) ** 2
    errors = _resampled_error_powers(est, bf, alpha, rng, n_resamples)
    symbol_power = rng.exponential(size=n_resamples)
    return np.log2(1.0 + signal * symbol_power / (errors + config.noise_to_power))


def empirical_secondary_rate(est, bf, config, rng, n_resamples):
    return float(np.mean(secondary_rate_samples(est, bf, config, rng, n_resamples)))


def effective_throughput(rate, factor):
    """Rate discounted by the share of the frame left after training."""
    if not 0.0 <= factor <= 1.0:
        raise ValueError(f"throughput factor must lie in [0, 1], got {factor}")
    return rate * factor
