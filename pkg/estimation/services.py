"""Two-phase LMMSE training: the direct links g_m first (BD muted), then the
cascaded links h_m = q f_m with the residual phase-1 error treated as noise.

Every covariance is a multiple of the identity, so the estimators reduce to a
per-AP scalar coefficient times the projected observation.
"""

import logging

import numpy as np

from channel.utils import phase1_observation, phase2_observation

from .models import ChannelEstimate

logger = logging.getLogger(__name__)


def _per_ap(coefficient, y):
    coefficient = np.asarray(coefficient, dtype=float)
    if y.ndim == 2 and coefficient.ndim == 1:
        return coefficient[:, None]
    return coefficient


def training_enr(p_t, tau, sigma2):
    """Training energy-to-noise ratio p_t*tau/sigma^2."""
    return p_t * tau / sigma2


def direct_error_variance(b, e1):
    return b / (1.0 + e1 * b)


def direct_estimate_variance(b, e1):
    return e1 * b ** 2 / (1.0 + e1 * b)


def _cascaded_denominator(eps, b, e1, e2, alpha):
    return alpha * e2 * eps + e2 * direct_error_variance(b, e1) + 1.0


def cascaded_error_variance(eps, b, e1, e2, alpha):
    return eps * (e2 * direct_error_variance(b, e1) + 1.0) / _cascaded_denominator(eps, b, e1, e2, alpha)


def cascaded_estimate_variance(eps, b, e1, e2, alpha):
    return alpha * e2 * eps ** 2 / _cascaded_denominator(eps, b, e1, e2, alpha)


def direct_coefficient(b, tau1, p_t, sigma2):
    return p_t * b / (p_t * tau1 * b + sigma2)


def cascaded_coefficient(eps, b, e1, tau2, p_t, sigma2, alpha):
    residual = p_t * tau2 * direct_error_variance(b, e1)
    return alpha * p_t * eps / (alpha * p_t * tau2 * eps + residual + sigma2)


def estimate_direct(obs, b, tau1, p_t, sigma2):
    if obs.phase != 1:
        raise ValueError(f"direct-link estimation needs a phase-1 observation, got phase {obs.phase}")
    return _per_ap(direct_coefficient(b, tau1, p_t, sigma2), obs.y) * obs.y


def estimate_cascaded(obs, eps, b, e1, tau2, p_t, sigma2, alpha):
    if obs.phase != 2:
        raise ValueError(f"cascaded-link estimation needs a phase-2 observation, got phase {obs.phase}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"reflection coefficient must lie in (0, 1], got {alpha}")
    return _per_ap(cascaded_coefficient(eps, b, e1, tau2, p_t, sigma2, alpha), obs.y) * obs.y


def lmmse_estimate(cross_covariance, observation_covariance, y):
    """Generic LMMSE x_hat = R_xy R_y^{-1} y (matrix form, used to cross-check the scalar form)."""
    return np.asarray(cross_covariance) @ np.linalg.solve(np.asarray(observation_covariance), y)


def run_two_phase_estimation(realization, gains, config, rng):
    e1, e2 = config.e1, config.e2
    p_t, sigma2, alpha = config.training_power, config.noise_power, config.alpha

    obs1 = phase1_observation(realization.g, config.tau1, p_t, sigma2, rng)
    g_hat = estimate_direct(obs1, gains.b, config.tau1, p_t, sigma2)
    g_err = realization.g - g_hat

    obs2 = phase2_observation(realization.h, g_err, config.tau2, p_t, sigma2, alpha, rng)
    h_hat = estimate_cascaded(obs2, gains.epsilon, gains.b, e1, config.tau2, p_t, sigma2, alpha)
    h_err = realization.h - h_hat

    logger.debug(f"Estimated {realization.num_aps} APs with e1={e1:.3e}, e2={e2:.3e}")
    return ChannelEstimate(
        g_hat=g_hat,
        h_hat=h_hat,
        g_err=g_err,
        h_err=h_err,
        var_g_err=direct_error_variance(gains.b, e1),
        var_h_err=cascaded_error_variance(gains.epsilon, gains.b, e1, e2, alpha),
        e1=e1,
        e2=e2,
    )
