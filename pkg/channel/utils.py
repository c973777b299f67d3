import math

import numpy as np

from math_kernels.utils import sample_cscg_vector

from .models import ChannelRealization, TrainingObservation


def _check_training(tau, p_t, sigma2):
    if int(tau) < 1:
        raise ValueError(f"training length must be at least 1, got {tau}")
    if not p_t > 0:
        raise ValueError(f"training power must be positive, got {p_t}")
    if sigma2 < 0:
        raise ValueError(f"noise power must be non-negative, got {sigma2}")


def sample_realization(gains, antennas_per_ap, rng):
    """g_m ~ CN(0, b_m I), f_m ~ CN(0, zeta_m I), q ~ CN(0, upsilon), h_m = q f_m."""
    shape = (gains.num_aps, antennas_per_ap)
    g = sample_cscg_vector(shape, gains.b[:, None], rng)
    f = sample_cscg_vector(shape, gains.zeta[:, None], rng)
    q = sample_cscg_vector(1, gains.upsilon, rng)[0]
    return ChannelRealization.from_links(g, f, q)


def phase1_observation(g, tau1, p_t, sigma2, rng):
    """tau1*g + n with n ~ CN(0, tau1*sigma^2/p_t I); the pilot matrix is never formed."""
    _check_training(tau1, p_t, sigma2)
    g = np.asarray(g, dtype=complex)
    noise = sample_cscg_vector(g.shape, tau1 * sigma2 / p_t, rng)
    return TrainingObservation(y=tau1 * g + noise, phase=1)


def phase2_observation(h, g_err, tau2, p_t, sigma2, alpha, rng):
    """tau2*h + (tau2/sqrt(alpha))*g_err + n with n ~ CN(0, tau2*sigma^2/(p_t*alpha) I).

    ``g_err`` is the realized phase-1 error of the same trial. The BD
    backscatters an all-ones pilot.
    """
    _check_training(tau2, p_t, sigma2)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"phase-2 training needs a reflection coefficient in (0, 1], got {alpha}")
    h = np.asarray(h, dtype=complex)
    g_err = np.asarray(g_err, dtype=complex)
    if h.shape != g_err.shape:
        raise ValueError(f"dimension mismatch: h {h.shape} vs g_err {g_err.shape}")
    noise = sample_cscg_vector(h.shape, tau2 * sigma2 / (p_t * alpha), rng)
    return TrainingObservation(y=tau2 * h + (tau2 / math.sqrt(alpha)) * g_err + noise, phase=2)


def unit_modulus_pilot(tau, rng):
    """Random-phase pilot with ||phi||^2 = tau."""
    if int(tau) < 1:
        raise ValueError(f"pilot length must be at least 1, got {tau}")
    return np.exp(2j * np.pi * rng.uniform(size=tau))


def pilot_training_matrix(g, pilot, p_t, sigma2, rng):
    """Received N x tau block sqrt(p_t) g phi^H + Z for one AP."""
    g = np.asarray(g, dtype=complex)
    pilot = np.asarray(pilot, dtype=complex)
    noise = sample_cscg_vector((g.shape[0], pilot.shape[0]), sigma2, rng)
    return math.sqrt(p_t) * np.outer(g, pilot.conj()) + noise


def project_training_matrix(received, pilot, p_t):
    """(1/sqrt(p_t)) Y phi, the sufficient statistic the estimators consume."""
    return TrainingObservation(y=(received @ np.asarray(pilot, dtype=complex)) / math.sqrt(p_t), phase=1)
