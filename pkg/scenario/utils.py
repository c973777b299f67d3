import math

import numpy as np

from symrad.exceptions import ConfigError

from .models import LinkGains


def grid_positions(side_count, area_side):
    """Evenly spaced side_count x side_count AP grid spanning a square centred on the origin.

    The outermost APs sit on the square's edges, so (4, 750) yields the
    coordinate set {-375, -125, 125, 375} on each axis. Row-major: y
    ascending outer, x ascending inner.
    """
    if side_count < 1:
        raise ValueError(f"side_count must be positive, got {side_count}")
    if area_side <= 0:
        raise ValueError(f"area_side must be positive, got {area_side}")
    if side_count == 1:
        return [(0.0, 0.0)]
    half = area_side / 2.0
    axis = np.linspace(-half, half, side_count)
    xs, ys = np.meshgrid(axis, axis)
    return [(float(x), float(y)) for x, y in zip(xs.ravel(), ys.ravel())]


def square_grid_positions(num_aps, area_side):
    side_count = math.isqrt(num_aps)
    if side_count * side_count != num_aps:
        raise ConfigError('num_aps', f"grid placement needs a perfect square, got {num_aps}")
    return grid_positions(side_count, area_side)


def reference_gain(wavelength):
    """beta_0 = (lambda / 4 pi)^2."""
    return (wavelength / (4.0 * math.pi)) ** 2


def path_loss(distance, gamma, wavelength):
    """Large-scale gain beta_0 * d^-gamma (linear, not dB)."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance} (co-located nodes)")
    if gamma <= 0:
        raise ValueError(f"path-loss exponent must be positive, got {gamma}")
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return reference_gain(wavelength) * distance ** (-gamma)


def build_link_gains(config):
    rx = np.asarray(config.receiver_position)
    bd = np.asarray(config.bd_position)
    b = []
    zeta = []
    for position in config.ap_positions:
        ap = np.asarray(position)
        b.append(path_loss(float(np.linalg.norm(ap - rx)), config.pathloss_exp_ap, config.wavelength))
        zeta.append(path_loss(float(np.linalg.norm(ap - bd)), config.pathloss_exp_ap, config.wavelength))
    upsilon = path_loss(float(np.linalg.norm(bd - rx)), config.pathloss_exp_bd, config.wavelength)
    return LinkGains.from_components(b, zeta, upsilon)
