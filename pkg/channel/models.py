from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One draw of the small-scale channels; rows of g, f, h are APs, columns antennas."""

    g: np.ndarray
    f: np.ndarray
    q: complex
    h: np.ndarray

    @classmethod
    def from_links(cls, g, f, q):
        f = np.asarray(f, dtype=complex)
        q = complex(q)
        return cls(g=np.asarray(g, dtype=complex), f=f, q=q, h=q * f)

    @property
    def num_aps(self):
        return self.g.shape[0]

    @property
    def antennas_per_ap(self):
        return self.g.shape[1]


@dataclass(frozen=True, eq=False)
class TrainingObservation:
    """Pilot-projected, power-scaled training statistic for one phase."""

    y: np.ndarray
    phase: int

    def __post_init__(self):
        if self.phase not in (1, 2):
            raise ValueError(f"training phase must be 1 or 2, got {self.phase}")
        if not np.all(np.isfinite(self.y)):
            raise ValueError("training observation has non-finite entries")
