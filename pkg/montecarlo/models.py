from dataclasses import dataclass
from typing import Optional

import numpy as np

from rates.models import RatePair

SERIES = (
    'mean_primary_bound',
    'mean_secondary_bound',
    'mean_primary_perfect',
    'mean_secondary_perfect',
    'stderr_primary_bound',
    'stderr_secondary_bound',
    'stderr_primary_perfect',
    'stderr_secondary_perfect',
)


@dataclass(frozen=True)
class TrialPoint:
    """Rates of one trial at one rho."""

    rho: float
    bound: RatePair
    perfect: RatePair
    empirical_primary: Optional[float] = None


@dataclass(frozen=True, eq=False)
class RateRegion:
    """Per-rho trial averages of the bound and perfect-CSI rate pairs, with standard errors."""

    rho_grid: tuple
    mean_primary_bound: np.ndarray
    mean_secondary_bound: np.ndarray
    mean_primary_perfect: np.ndarray
    mean_secondary_perfect: np.ndarray
    stderr_primary_bound: np.ndarray
    stderr_secondary_bound: np.ndarray
    stderr_primary_perfect: np.ndarray
    stderr_secondary_perfect: np.ndarray
    num_trials: int
    config_digest: str
    sweep_param: str = 'base'
    sweep_value: Optional[float] = None
    mean_primary_empirical: Optional[np.ndarray] = None
    stderr_primary_empirical: Optional[np.ndarray] = None
    throughput_factor: Optional[float] = None

    def __post_init__(self):
        size = len(self.rho_grid)
        series = list(SERIES)
        if self.mean_primary_empirical is not None:
            series += ['mean_primary_empirical', 'stderr_primary_empirical']
        for name in series:
            values = getattr(self, name)
            if values is None or len(values) != size:
                raise ValueError(f"{name} must have one value per rho ({size})")
            if name.startswith('stderr') and np.any(np.asarray(values) < 0):
                raise ValueError(f"{name} must be non-negative")

    @property
    def has_empirical(self):
        return self.mean_primary_empirical is not None

    def same_values(self, other):
        """Bit-for-bit equality of every series."""
        return all(np.array_equal(getattr(self, name), getattr(other, name)) for name in SERIES) and (
            self.rho_grid == other.rho_grid and self.num_trials == other.num_trials
        )
