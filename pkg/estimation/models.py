from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ChannelEstimate:
    """Per-AP LMMSE estimates, their realized errors and the model error variances.

    ``g_hat + g_err`` reproduces the true direct channel and ``h_hat + h_err``
    the true cascaded channel (to floating-point rounding).
    """

    g_hat: np.ndarray
    h_hat: np.ndarray
    g_err: np.ndarray
    h_err: np.ndarray
    var_g_err: np.ndarray
    var_h_err: np.ndarray
    e1: float
    e2: float

    @property
    def num_aps(self):
        return self.g_hat.shape[0]
