import csv
import json
import logging
import math
from pathlib import Path

from django.template.loader import render_to_string
from rest_framework import serializers

from rates.utils import effective_throughput
from scenario.models import ScenarioConfig
from scenario.serializers import ScenarioConfigSerializer
from symrad.exceptions import ConfigError

from .serializers import RunManifestSerializer

logger = logging.getLogger(__name__)

CSV_HEADER = [
    'sweep_param',
    'sweep_value',
    'rho',
    'primary_bound_bpcu',
    'secondary_bound_bpcu',
    'primary_perfect_bpcu',
    'secondary_perfect_bpcu',
    'primary_stderr',
    'secondary_stderr',
]
THROUGHPUT_COLUMNS = ['primary_bound_eff_bpcu', 'secondary_bound_eff_bpcu']
EMPIRICAL_COLUMNS = ['primary_empirical_bpcu']


def load_config(path=None):
    """Parse and validate a JSON experiment file; no path means the reference scenario."""
    if path is None:
        return ScenarioConfig()
    text = Path(path).read_text(encoding='utf-8')
    payload = json.loads(text)
    if not isinstance(payload, dict):
        raise ConfigError('config', "top level must be a JSON object")

    serializer = ScenarioConfigSerializer(data=payload)
    unknown = sorted(set(payload) - set(serializer.fields))
    if unknown:
        raise serializers.ValidationError({key: "Unknown configuration key." for key in unknown})
    serializer.is_valid(raise_exception=True)
    config = serializer.save()
    logger.debug(f"Loaded configuration {config.digest()[:12]} from {path}")
    return config


def dump_config(config, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = dict(ScenarioConfigSerializer(config).data)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


def _number(value):
    if value is None:
        return ''
    return f"{value:.6g}"


def region_rows(region, throughput=False, empirical=False):
    factor = region.throughput_factor
    for index, rho in enumerate(region.rho_grid):
        primary = region.mean_primary_bound[index]
        secondary = region.mean_secondary_bound[index]
        row = [
            region.sweep_param,
            _number(region.sweep_value),
            _number(rho),
            _number(primary),
            _number(secondary),
            _number(region.mean_primary_perfect[index]),
            _number(region.mean_secondary_perfect[index]),
            _number(region.stderr_primary_bound[index]),
            _number(region.stderr_secondary_bound[index]),
        ]
        if throughput:
            if factor is None:
                row += ['', '']
            else:
                row += [_number(effective_throughput(primary, factor)),
                        _number(effective_throughput(secondary, factor))]
        if empirical:
            row.append(_number(region.mean_primary_empirical[index]) if region.has_empirical else '')
        yield row


def emit_csv(regions, path):
    """One row per (sweep value, rho), sorted by sweep value then rho.

    Effective-throughput and empirical columns are appended only when some
    region carries them.
    """
    if not regions:
        raise ValueError("emit_csv needs at least one rate region")
    throughput = any(region.throughput_factor is not None for region in regions)
    empirical = any(region.has_empirical for region in regions)
    header = list(CSV_HEADER)
    if throughput:
        header += THROUGHPUT_COLUMNS
    if empirical:
        header += EMPIRICAL_COLUMNS

    ordered = sorted(regions, key=lambda region: -math.inf if region.sweep_value is None else region.sweep_value)
    rows = []
    for region in ordered:
        rows.extend(sorted(region_rows(region, throughput, empirical), key=lambda row: float(row[2])))

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def emit_plot_script(csv_path, out_path):
    """Render a standalone matplotlib script that draws one rate-region curve per sweep value."""
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise FileNotFoundError(f"CSV not found: {csv_path}")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    script = render_to_string('cli/plot_rate_region.tmpl', {
        'csv_name': csv_path.name,
        'figure_name': f"{csv_path.stem}.png",
    })
    out_path.write_text(script, encoding='utf-8')
    logger.info(f"Wrote plot script {out_path}")
    return out_path


def write_manifest(manifest, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = RunManifestSerializer(manifest).data
    path.write_text(json.dumps(data, indent=2) + '\n', encoding='utf-8')
    return path


def parse_sweep_values(text):
    values = []
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(float(item))
        except ValueError:
            raise ConfigError('values', f"'{item}' is not a number")
    return values


def dbm_to_watts(dbm):
    return 10 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts):
    if not watts > 0:
        raise ValueError(f"power must be positive to express in dBm, got {watts}")
    return 10.0 * math.log10(watts) + 30.0


def summary_table(regions):
    """Plain-text per-rho summary of the bound and perfect-CSI means."""
    lines = [f"{'sweep':<16}{'rho':>6}{'R_s bound':>12}{'R_c bound':>12}{'R_s perfect':>13}{'R_c perfect':>13}"]
    for region in regions:
        label = region.sweep_param if region.sweep_value is None else f"{region.sweep_param}={region.sweep_value:g}"
        for index, rho in enumerate(region.rho_grid):
            lines.append(
                f"{label:<16}{rho:>6.2f}"
                f"{region.mean_primary_bound[index]:>12.4g}{region.mean_secondary_bound[index]:>12.4g}"
                f"{region.mean_primary_perfect[index]:>13.4g}{region.mean_secondary_perfect[index]:>13.4g}"
            )
    return '\n'.join(lines)
