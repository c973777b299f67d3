"""Trial orchestration: sample, train, estimate once, then sweep rho.

Trials run sequentially or on a process pool. Each trial draws from its own
generator seeded with ``seed ^ trial_index`` and results are reduced in
trial-index order, so the worker count never changes the output.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from django.conf import settings

from beamforming.utils import build_beamformer_set, true_channel_beamformer_set
from channel.utils import sample_realization
from estimation.services import run_two_phase_estimation
from math_kernels.utils import make_rng
from rates.models import RatePair
from rates.utils import (
    empirical_primary_rate,
    noise_error_term,
    primary_rate_bound,
    primary_rate_perfect,
    primary_sinr_perfect,
    secondary_rate_bound,
    secondary_rate_perfect,
)
from scenario.utils import build_link_gains, square_grid_positions
from symrad.exceptions import CampaignError, ConfigError, DegenerateBeamformerError, TrialError

from .models import RateRegion, TrialPoint

logger = logging.getLogger(__name__)

CHUNKS_PER_WORKER = 4

# accepted name -> (label written to results, config field)
SWEEP_PARAMETERS = {
    'tau1': ('tau1', 'tau1'),
    'tau2': ('tau2', 'tau2'),
    'M': ('M', 'num_aps'),
    'num_aps': ('M', 'num_aps'),
    'N': ('N', 'antennas_per_ap'),
    'antennas_per_ap': ('N', 'antennas_per_ap'),
    'alpha': ('alpha', 'alpha'),
    'num_trials': ('num_trials', 'num_trials'),
    'snr_db': ('snr_db', 'snr_db'),
}
INTEGER_FIELDS = ('tau1', 'tau2', 'num_aps', 'antennas_per_ap', 'num_trials')


def check_trainable(config):
    if not config.alpha > 0:
        raise ConfigError('alpha', f"phase-2 training needs alpha > 0, got {config.alpha}")


def trial_seed(seed, trial_index):
    return seed ^ trial_index


def resolve_workers(workers=None):
    """Explicit value, else SYMRAD_WORKERS, else 1."""
    if workers is None:
        workers = getattr(settings, 'SYMRAD_WORKERS', 1)
    workers = int(workers)
    if workers < 1:
        raise ConfigError('workers', f"must be at least 1, got {workers}")
    return workers


def run_trial(config, gains, trial_index):
    """Rates of one channel realization at every rho of the grid."""
    rng = make_rng(trial_seed(config.seed, trial_index))
    realization = sample_realization(gains, config.antennas_per_ap, rng)
    try:
        est = run_two_phase_estimation(realization, gains, config, rng)
    except ValueError as exc:
        raise TrialError(trial_index, None, exc) from exc
    error_term = noise_error_term(gains, config)
    p, alpha, sigma2 = config.transmit_power, config.alpha, config.noise_power

    points = []
    for rho in config.rho_grid:
        try:
            bf = build_beamformer_set(est, rho)
            if config.perfect_csi_beamforming == 'true':
                weights = true_channel_beamformer_set(realization, rho).w
            else:
                weights = bf.w
        except DegenerateBeamformerError as exc:
            raise TrialError(trial_index, rho, exc) from exc

        bound = RatePair(
            primary=primary_rate_bound(est, bf, error_term, alpha),
            secondary=secondary_rate_bound(est, bf, error_term, alpha),
        )
        perfect = RatePair(
            primary=primary_rate_perfect(primary_sinr_perfect(realization, weights, p, alpha, sigma2)),
            secondary=secondary_rate_perfect(realization, weights, p, alpha, sigma2),
        )
        empirical = None
        if config.empirical_resamples:
            empirical = empirical_primary_rate(est, bf, config, rng, config.empirical_resamples)
        points.append(TrialPoint(rho=rho, bound=bound, perfect=perfect, empirical_primary=empirical))
    return points


def _run_chunk(config, gains, indices):
    results = []
    for index in indices:
        try:
            results.append((index, run_trial(config, gains, index), None))
        except TrialError as exc:
            results.append((index, None, str(exc)))
    return results


def _chunk_indices(num_trials, workers):
    count = min(num_trials, workers * CHUNKS_PER_WORKER)
    return [[int(index) for index in chunk] for chunk in np.array_split(np.arange(num_trials), count) if len(chunk)]


def _stderr(values):
    if values.shape[0] < 2:
        return np.zeros(values.shape[1])
    return values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])


def _reduce(config, outcomes, sweep_param, sweep_value):
    def series(getter):
        return np.array([[getter(point) for point in points] for points in outcomes], dtype=float)

    columns = {
        'primary_bound': series(lambda point: point.bound.primary),
        'secondary_bound': series(lambda point: point.bound.secondary),
        'primary_perfect': series(lambda point: point.perfect.primary),
        'secondary_perfect': series(lambda point: point.perfect.secondary),
    }
    fields = {}
    for name, values in columns.items():
        fields[f'mean_{name}'] = values.mean(axis=0)
        fields[f'stderr_{name}'] = _stderr(values)
    if config.empirical_resamples:
        empirical = series(lambda point: point.empirical_primary)
        fields['mean_primary_empirical'] = empirical.mean(axis=0)
        fields['stderr_primary_empirical'] = _stderr(empirical)

    return RateRegion(
        rho_grid=config.rho_grid,
        num_trials=len(outcomes),
        config_digest=config.digest(),
        sweep_param=sweep_param,
        sweep_value=sweep_value,
        throughput_factor=config.throughput_factor,
        **fields,
    )


def run_campaign(config, workers=None, sweep_param='base', sweep_value=None):
    """Average ``config.num_trials`` trials into a RateRegion; any failed trial fails the campaign."""
    check_trainable(config)
    workers = resolve_workers(workers)
    gains = build_link_gains(config)
    digest = config.digest()
    logger.info(f"Starting campaign {digest[:12]}: {config.num_trials} trials, "
                f"{len(config.rho_grid)} rho values, {workers} worker(s)")
    started = time.perf_counter()

    chunks = _chunk_indices(config.num_trials, workers)
    if workers == 1:
        results = (_run_chunk(config, gains, chunk) for chunk in chunks)
    else:
        executor = ProcessPoolExecutor(max_workers=workers)
        results = executor.map(_run_chunk, [config] * len(chunks), [gains] * len(chunks), chunks)

    outcomes = [None] * config.num_trials
    failures = []
    try:
        for done, chunk in enumerate(results, start=1):
            for index, points, error in chunk:
                if error is not None:
                    logger.error(f"Trial {index} failed: {error}")
                    failures.append(error)
                outcomes[index] = points
            logger.debug(f"Campaign {digest[:12]}: chunk {done}/{len(chunks)} done")
    finally:
        if workers > 1:
            executor.shutdown()

    if failures:
        raise CampaignError(failures)

    region = _reduce(config, outcomes, sweep_param, sweep_value)
    logger.info(f"Campaign {digest[:12]} finished in {time.perf_counter() - started:.2f}s")
    return region


def _coerce_value(field, value):
    if field in INTEGER_FIELDS:
        if float(value) != int(float(value)):
            raise ConfigError(field, f"sweep value {value} is not an integer")
        return int(float(value))
    return float(value)


def apply_sweep_value(config, field, value):
    """Return ``config`` with one swept parameter replaced; revalidates the result."""
    if field == 'snr_db':
        power = config.noise_power * 10 ** (value / 10)
        return config.with_overrides(transmit_power=power, training_power=power)
    if field == 'num_aps':
        positions = square_grid_positions(value, config.area_side)
        return config.with_overrides(num_aps=value, ap_positions=positions)
    return config.with_overrides(**{field: value})


def sweep(config, parameter_name, values, workers=None):
    """One campaign per value, all from the same base seed; regions come back in value order."""
    if parameter_name not in SWEEP_PARAMETERS:
        raise ConfigError('param', f"unknown sweep parameter '{parameter_name}', "
                                   f"expected one of {', '.join(SWEEP_PARAMETERS)}")
    values = list(values)
    if not values:
        raise ConfigError('values', "sweep needs at least one value")

    label, field = SWEEP_PARAMETERS[parameter_name]
    points = []
    for raw in values:
        value = _coerce_value(field, raw)
        swept = apply_sweep_value(config, field, value)
        check_trainable(swept)
        points.append((value, swept))

    regions = []
    for value, swept in points:
        logger.info(f"Sweep {label}={value}")
        regions.append(run_campaign(swept, workers=workers, sweep_param=label, sweep_value=value))
    return regions
