from dataclasses import dataclass

import numpy as np

UNIT_NORM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class BeamformerSet:
    """Unit-norm transmit beamformer per AP (rows) for one weighting coefficient rho."""

    w: np.ndarray
    rho: float

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        norms = np.linalg.norm(self.w, axis=-1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOLERANCE):
            raise ValueError("every beamformer must have unit norm")

    @property
    def num_aps(self):
        return self.w.shape[0]
