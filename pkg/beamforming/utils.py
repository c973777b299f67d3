"""Per-AP MRT and weighted-MRT beamformers.

Each AP only touches its own row: nothing here mixes information across APs.
Inputs are single vectors (N,) or stacks of per-AP rows (M, N).
"""

import numpy as np

from symrad.exceptions import AntiparallelBeamformerError, DegenerateBeamformerError

from .models import BeamformerSet

DEGENERATE_NORM = 1e-12


def _failing_ap(mask):
    if mask.ndim == 0:
        return None
    return int(np.flatnonzero(mask)[0])


def _check_rho(rho):
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")


def mrt(v):
    """v/||v||, row by row."""
    v = np.asarray(v, dtype=complex)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    zero = norms[..., 0] == 0
    if np.any(zero):
        raise DegenerateBeamformerError("cannot steer towards a zero channel estimate", ap_index=_failing_ap(zero))
    return v / norms


def weighted_mrt(w_s, w_c, rho):
    """kappa*(rho*w_s + (1-rho)*w_c) with kappa chosen per AP for unit norm.

    The endpoints return the corresponding MRT direction unchanged.
    """
    _check_rho(rho)
    w_s = np.asarray(w_s, dtype=complex)
    w_c = np.asarray(w_c, dtype=complex)
    if w_s.shape != w_c.shape:
        raise ValueError(f"dimension mismatch: {w_s.shape} vs {w_c.shape}")
    if rho == 1.0:
        return w_s.copy()
    if rho == 0.0:
        return w_c.copy()

    combined = rho * w_s + (1.0 - rho) * w_c
    norms = np.linalg.norm(combined, axis=-1, keepdims=True)
    cancelled = norms[..., 0] < DEGENERATE_NORM
    if np.any(cancelled):
        raise AntiparallelBeamformerError(
            f"weighted combination vanishes at rho={rho}", ap_index=_failing_ap(cancelled)
        )
    return combined / norms


def beamformer_set(direct, cascaded, rho):
    return BeamformerSet(w=weighted_mrt(mrt(direct), mrt(cascaded), rho), rho=float(rho))


def build_beamformer_set(est, rho):
    """Steer each AP from its own estimates g_hat_m and h_hat_m."""
    return beamformer_set(est.g_hat, est.h_hat, rho)


def true_channel_beamformer_set(realization, rho):
    """Same construction on the true channels; reference for the perfect-CSI comparison."""
    return beamformer_set(realization.g, realization.h, rho)
