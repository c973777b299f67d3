import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from estimation.services import training_enr
from symrad.exceptions import ConfigError

DEFAULT_SIDE_COUNT = 4
DEFAULT_AREA_SIDE = 750.0
SEED_LIMIT = 2 ** 64
BEAMFORMING_MODES = ('estimated', 'true')
MIN_EMPIRICAL_RESAMPLES = 1000


def _default_ap_positions():
    from .utils import grid_positions
    return tuple(grid_positions(DEFAULT_SIDE_COUNT, DEFAULT_AREA_SIDE))


def _default_rho_grid():
    return tuple(k / 10 for k in range(11))


def _as_point(key, value):
    try:
        x, y = (float(c) for c in value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected an (x, y) pair, got {value!r}")
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ConfigError(key, "coordinates must be finite")
    return (x, y)


@dataclass(frozen=True)
class ScenarioConfig:
    """Full experiment description: geometry, powers (W), training lengths, rho grid and seed.

    Defaults reproduce the reference deployment: a 4x4 AP grid over a
    750 m square, BD at the origin, receiver at (5 m, 0), p/sigma^2 =
    p_t/sigma^2 = 130 dB.
    """

    num_aps: int = 16
    antennas_per_ap: int = 4
    ap_positions: tuple = field(default_factory=_default_ap_positions)
    receiver_position: tuple = (5.0, 0.0)
    bd_position: tuple = (0.0, 0.0)
    transmit_power: float = 0.1
    training_power: float = 0.1
    noise_power: float = 1e-14
    alpha: float = 1.0
    tau1: int = 100
    tau2: int = 100
    wavelength: float = 0.0857
    pathloss_exp_ap: float = 2.7
    pathloss_exp_bd: float = 2.1
    rho_grid: tuple = field(default_factory=_default_rho_grid)
    num_trials: int = 1000
    seed: int = 0
    area_side: float = DEFAULT_AREA_SIDE
    frame_length: Optional[int] = None
    perfect_csi_beamforming: str = 'estimated'
    empirical_resamples: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'ap_positions', tuple(
            _as_point('ap_positions', position) for position in self.ap_positions
        ))
        object.__setattr__(self, 'receiver_position', _as_point('receiver_position', self.receiver_position))
        object.__setattr__(self, 'bd_position', _as_point('bd_position', self.bd_position))
        object.__setattr__(self, 'rho_grid', tuple(float(rho) for rho in self.rho_grid))
        self._validate()

    def _validate(self):
        for key in ('num_aps', 'antennas_per_ap', 'tau1', 'tau2', 'num_trials'):
            if int(getattr(self, key)) < 1:
                raise ConfigError(key, "must be a positive integer")
        if len(self.ap_positions) != self.num_aps:
            raise ConfigError(
                'ap_positions', f"expected {self.num_aps} positions, got {len(self.ap_positions)}"
            )
        for key in ('transmit_power', 'training_power', 'noise_power', 'wavelength',
                    'pathloss_exp_ap', 'pathloss_exp_bd', 'area_side'):
            value = getattr(self, key)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(key, f"must be finite and positive, got {value}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError('alpha', f"must lie in [0, 1], got {self.alpha}")
        if not self.rho_grid:
            raise ConfigError('rho_grid', "must contain at least one value")
        if any(not 0.0 <= rho <= 1.0 for rho in self.rho_grid):
            raise ConfigError('rho_grid', "every rho must lie in [0, 1]")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ConfigError('seed', "must be a 64-bit unsigned integer")
        if self.frame_length is not None and self.frame_length <= self.tau1 + self.tau2:
            raise ConfigError('frame_length', "must exceed tau1 + tau2")
        if self.perfect_csi_beamforming not in BEAMFORMING_MODES:
            raise ConfigError('perfect_csi_beamforming', f"must be one of {BEAMFORMING_MODES}")
        if self.empirical_resamples and self.empirical_resamples < MIN_EMPIRICAL_RESAMPLES:
            raise ConfigError(
                'empirical_resamples', f"must be 0 or at least {MIN_EMPIRICAL_RESAMPLES}"
            )

        rx = np.array(self.receiver_position)
        bd = np.array(self.bd_position)
        if np.linalg.norm(rx - bd) == 0:
            raise ConfigError('bd_position', "BD coincides with the receiver")
        for index, position in enumerate(self.ap_positions):
            ap = np.array(position)
            if np.linalg.norm(ap - rx) == 0:
                raise ConfigError('ap_positions', f"AP {index} coincides with the receiver")
            if np.linalg.norm(ap - bd) == 0:
                raise ConfigError('ap_positions', f"AP {index} coincides with the BD")

    @property
    def e1(self):
        """Phase-1 training ENR."""
        return training_enr(self.training_power, self.tau1, self.noise_power)

    @property
    def e2(self):
        """Phase-2 training ENR."""
        return training_enr(self.training_power, self.tau2, self.noise_power)

    @property
    def noise_to_power(self):
        return self.noise_power / self.transmit_power

    @property
    def throughput_factor(self):
        if self.frame_length is None:
            return None
        return (self.frame_length - self.tau1 - self.tau2) / self.frame_length

    def to_dict(self):
        data = asdict(self)
        data['ap_positions'] = [list(p) for p in self.ap_positions]
        data['receiver_position'] = list(self.receiver_position)
        data['bd_position'] = list(self.bd_position)
        data['rho_grid'] = list(self.rho_grid)
        return data

    def digest(self):
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def with_overrides(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class LinkGains:
    """Large-scale gains: b_m (AP->receiver), zeta_m (AP->BD), upsilon (BD->receiver)."""

    b: np.ndarray
    zeta: np.ndarray
    upsilon: float
    epsilon: np.ndarray

    @classmethod
    def from_components(cls, b, zeta, upsilon):
        b = np.asarray(b, dtype=float)
        zeta = np.asarray(zeta, dtype=float)
        upsilon = float(upsilon)
        if b.shape != zeta.shape or b.ndim != 1:
            raise ValueError(f"b and zeta must be matching 1-D arrays, got {b.shape} and {zeta.shape}")
        if np.any(b <= 0) or np.any(zeta <= 0) or upsilon <= 0:
            raise ValueError("all large-scale gains must be positive")
        return cls(b=b, zeta=zeta, upsilon=upsilon, epsilon=upsilon * zeta)

    @property
    def num_aps(self):
        return self.b.shape[0]
