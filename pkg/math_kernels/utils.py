"""Complex Gaussian sampling, the scaled exponential integral and the ergodic
Rayleigh rate, plus the beamformed inner-product sum shared by every rate."""

import math

import numpy as np

EULER_GAMMA = 0.5772156649015329
LOG2_E = 1.0 / math.log(2.0)

# Series below, continued fraction above; both agree to ~1e-15 at the seam.
_SERIES_LIMIT = 1.0
_EPS = np.finfo(float).eps
_MAX_ITERATIONS = 1000
_FPMIN = 1e-300


def make_rng(seed):
    """Return a deterministic generator; identical seeds give identical streams."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(int(seed))


def sample_cscg_vector(n, variance, rng):
    """Draw CN(0, variance) entries: real and imaginary parts each N(0, variance/2).

    ``n`` is an entry count or a shape tuple; ``variance`` is a scalar or an
    array broadcastable against that shape (e.g. one variance per AP row).
    """
    shape = (n,) if np.ndim(n) == 0 else tuple(n)
    if any(int(size) < 1 for size in shape):
        raise ValueError(f"sample shape must be positive, got {shape}")
    variance = np.asarray(variance, dtype=float)
    if not np.all(np.isfinite(variance)) or np.any(variance < 0):
        raise ValueError("variance must be finite and non-negative")

    scale = np.sqrt(variance / 2.0)
    real = rng.standard_normal(shape)
    imag = rng.standard_normal(shape)
    return scale * (real + 1j * imag)


def _scaled_e1_series(x):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k * k!)
    total = 0.0
    term = 1.0
    for k in range(1, _MAX_ITERATIONS):
        term *= -x / k
        contribution = term / k
        total += contribution
        if abs(contribution) <= _EPS * abs(total):
            break
    return math.exp(x) * (-EULER_GAMMA - math.log(x) - total)


def _scaled_e1_continued_fraction(x):
    # Modified Lentz evaluation of e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- ...)))
    b = x + 1.0
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITERATIONS):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return h
    raise ArithmeticError(f"continued fraction for e^x E1(x) did not converge at x={x}")


def exp_scaled_e1(x):
    """Return e^x * E1(x) for x > 0 without forming e^x and E1(x) separately."""
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise ValueError(f"exp_scaled_e1 requires a finite x > 0, got {x}")
    if x <= _SERIES_LIMIT:
        return _scaled_e1_series(x)
    return _scaled_e1_continued_fraction(x)


def ergodic_rayleigh_rate(beta):
    """Closed form of the integral of log2(1 + beta*x) e^{-x} over x >= 0, in bpcu.

    Equals -e^{1/beta} Ei(-1/beta) log2(e) = e^{1/beta} E1(1/beta) log2(e).
    """
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and non-negative, got {beta}")
    if beta == 0.0:
        return 0.0
    inverse = 1.0 / beta
    if math.isinf(inverse):
        return 0.0
    return exp_scaled_e1(inverse) * LOG2_E


def beamformed_sum(channels, weights):
    """Sum over APs of a_m^H w_m (first argument conjugated)."""
    channels = np.asarray(channels, dtype=complex)
    weights = np.asarray(weights, dtype=complex)
    if channels.shape != weights.shape:
        raise ValueError(f"dimension mismatch: channels {channels.shape} vs weights {weights.shape}")
    return complex(np.sum(np.conj(channels) * weights))
