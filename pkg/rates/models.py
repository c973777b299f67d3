import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RatePair:
    """Primary and secondary rates in bits per channel use."""

    primary: float
    secondary: float

    def __post_init__(self):
        for name in ('primary', 'secondary'):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} rate must be finite and non-negative, got {value}")


@dataclass(frozen=True)
class NoiseErrorTerm:
    """Aggregate estimation-error plus noise power, normalized by the transmit power."""

    power: float

    def __post_init__(self):
        if not math.isfinite(self.power) or self.power <= 0:
            raise ValueError(f"error-plus-noise power must be finite and positive, got {self.power}")
