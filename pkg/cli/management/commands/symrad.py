import time
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from montecarlo.services import resolve_workers, run_campaign, sweep
from symrad.exception_handler import command_exception_handler
from symrad.exceptions import ConfigError

from ...models import RunManifest
from ...services import (
    dbm_to_watts,
    emit_csv,
    emit_plot_script,
    load_config,
    parse_sweep_values,
    summary_table,
    watts_to_dbm,
    write_manifest,
)


class Command(BaseCommand):
    help = "Cell-free symbiotic radio Monte Carlo simulator: run, sweep, check or dbm."

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='subcommand', required=True)

        run = subparsers.add_parser('run', help="Run one campaign and write rate_region.csv.")
        self._add_campaign_arguments(run)

        sweep_parser = subparsers.add_parser('sweep', help="Run one campaign per parameter value.")
        sweep_parser.add_argument('--param', required=True,
                                  help="tau1, tau2, M/num_aps, N/antennas_per_ap, alpha, num_trials or snr_db")
        sweep_parser.add_argument('--values', required=True, help="Comma-separated values, e.g. 1,10,100")
        self._add_campaign_arguments(sweep_parser)

        check = subparsers.add_parser('check', help="Validate a configuration and print its digest.")
        check.add_argument('--config', help="JSON configuration file (defaults to the reference scenario)")

        dbm = subparsers.add_parser('dbm', help="Convert dBm to watts (or watts to dBm).")
        dbm.add_argument('value', type=float)
        dbm.add_argument('--to-dbm', action='store_true', help="Treat VALUE as watts and print dBm")

    def _add_campaign_arguments(self, parser):
        parser.add_argument('--config', help="JSON configuration file (defaults to the reference scenario)")
        parser.add_argument('--out', help="Output directory (default: SYMRAD_OUTPUT_DIR)")
        parser.add_argument('--seed', type=int, help="Override the configured seed")
        parser.add_argument('--workers', type=int, help="Worker processes (default: SYMRAD_WORKERS)")
        parser.add_argument('--emit-plot', action='store_true', help="Also write a matplotlib plot script")

    def handle(self, *args, **options):
        subcommand = options['subcommand']
        try:
            getattr(self, f"handle_{subcommand}")(options)
        except Exception as exc:
            raise command_exception_handler(exc, {'subcommand': subcommand}) from exc

    def _campaign_setup(self, options):
        config = load_config(options['config'])
        if options['seed'] is not None:
            config = config.with_overrides(seed=options['seed'])
        out_dir = Path(options['out'] or settings.SYMRAD_OUTPUT_DIR)
        return config, out_dir, resolve_workers(options['workers'])

    def _write_outputs(self, regions, csv_path, options, manifest):
        manifest.outputs['csv'] = str(emit_csv(regions, csv_path))
        if options['emit_plot']:
            manifest.outputs['plot'] = str(emit_plot_script(csv_path, csv_path.with_name(f"plot_{csv_path.stem}.py")))
        manifest_path = csv_path.with_name('manifest.json')
        manifest.outputs['manifest'] = str(manifest_path)
        write_manifest(manifest, manifest_path)
        self.stdout.write(summary_table(regions))

    def handle_run(self, options):
        config, out_dir, workers = self._campaign_setup(options)
        started = time.perf_counter()
        region = run_campaign(config, workers=workers)
        manifest = RunManifest(
            command='run',
            config_digest=config.digest(),
            duration_seconds=round(time.perf_counter() - started, 3),
            workers=workers,
        )
        self._write_outputs([region], out_dir / 'rate_region.csv', options, manifest)

    def handle_sweep(self, options):
        config, out_dir, workers = self._campaign_setup(options)
        values = parse_sweep_values(options['values'])
        started = time.perf_counter()
        regions = sweep(config, options['param'], values, workers=workers)
        label = regions[0].sweep_param
        manifest = RunManifest(
            command='sweep',
            config_digest=config.digest(),
            duration_seconds=round(time.perf_counter() - started, 3),
            workers=workers,
            sweep_param=label,
            sweep_values=[region.sweep_value for region in regions],
        )
        self._write_outputs(regions, out_dir / f'sweep_{label}.csv', options, manifest)

    def handle_check(self, options):
        config = load_config(options['config'])
        self.stdout.write(config.digest())

    def handle_dbm(self, options):
        value = options['value']
        if options['to_dbm'] and not value > 0:
            raise ConfigError('value', f"watts must be positive, got {value}")
        result = watts_to_dbm(value) if options['to_dbm'] else dbm_to_watts(value)
        self.stdout.write(f"{result:.6g}")
