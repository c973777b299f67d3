import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings
from rest_framework import serializers

from montecarlo.models import RateRegion
from rates.utils import effective_throughput
from scenario.models import ScenarioConfig
from scenario.utils import grid_positions
from symrad.exceptions import CampaignError, ConfigError

from .services import (
    CSV_HEADER,
    dbm_to_watts,
    dump_config,
    emit_csv,
    emit_plot_script,
    load_config,
    parse_sweep_values,
    watts_to_dbm,
)

SMALL_CONFIG = {
    'num_aps': 4,
    'antennas_per_ap': 2,
    'num_trials': 3,
    'rho_grid': [0.0, 0.5, 1.0],
    'seed': 3,
}


def make_region(sweep_value=None, sweep_param='base', rho_grid=(0.0, 0.5, 1.0), **extra):
    size = len(rho_grid)
    base = np.linspace(1.0, 2.0, size)
    return RateRegion(
        rho_grid=tuple(rho_grid),
        mean_primary_bound=base + 0.123456789,
        mean_secondary_bound=base / 1000,
        mean_primary_perfect=base + 1,
        mean_secondary_perfect=base / 100,
        stderr_primary_bound=np.full(size, 0.01),
        stderr_secondary_bound=np.full(size, 1e-5),
        stderr_primary_perfect=np.zeros(size),
        stderr_secondary_perfect=np.zeros(size),
        num_trials=10,
        config_digest='abc',
        sweep_param=sweep_param,
        sweep_value=sweep_value,
        **extra,
    )


class TempDirMixin:

    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()

    def write_json(self, payload, name='config.json'):
        path = self.tmp / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding='utf-8')
        return path


class LoadConfigTests(TempDirMixin, SimpleTestCase):

    def test_empty_object_is_reference_scenario(self):
        self.assertEqual(load_config(self.write_json({})), ScenarioConfig())

    def test_no_path_is_reference_scenario(self):
        self.assertEqual(load_config(), ScenarioConfig())

    def test_overrides(self):
        config = load_config(self.write_json({'num_trials': 10, 'seed': 7}))
        self.assertEqual((config.num_trials, config.seed), (10, 7))

    def test_out_of_range_alpha_names_key(self):
        with self.assertRaises(serializers.ValidationError) as ctx:
            load_config(self.write_json({'alpha': 1.5}))
        self.assertIn('alpha', ctx.exception.detail)

    def test_unknown_key_is_rejected(self):
        with self.assertRaises(serializers.ValidationError) as ctx:
            load_config(self.write_json({'num_trails': 10}))
        self.assertIn('num_trails', ctx.exception.detail)

    def test_parse_error_reports_position(self):
        with self.assertRaises(json.JSONDecodeError) as ctx:
            load_config(self.write_json('{\n  "seed": 1,\n}'))
        self.assertEqual(ctx.exception.lineno, 3)

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            load_config(self.tmp / 'absent.json')

    def test_round_trip(self):
        config = ScenarioConfig(num_trials=5, seed=12, alpha=0.5, frame_length=300, rho_grid=(0.0, 0.25, 1.0))
        self.assertEqual(load_config(dump_config(config, self.tmp / 'dumped.json')), config)


class EmitCsvTests(TempDirMixin, SimpleTestCase):

    def read_lines(self, path):
        return path.read_text(encoding='utf-8').splitlines()

    def test_header_and_row_count(self):
        lines = self.read_lines(emit_csv([make_region(rho_grid=[k / 10 for k in range(11)])], self.tmp / 'a.csv'))
        self.assertEqual(lines[0], ','.join(CSV_HEADER))
        self.assertEqual(len(lines), 12)
        self.assertEqual(lines[1].split(',')[:4], ['base', '', '0', '1.12346'])

    def test_rows_sorted_by_value_then_rho(self):
        regions = [make_region(value, 'tau1', rho_grid=(1.0, 0.0)) for value in (100, 1, 10)]
        lines = self.read_lines(emit_csv(regions, self.tmp / 'sweep.csv'))
        self.assertEqual(len(lines), 7)
        keys = [tuple(line.split(',')[1:3]) for line in lines[1:]]
        self.assertEqual(keys, [('1', '0'), ('1', '1'), ('10', '0'), ('10', '1'), ('100', '0'), ('100', '1')])

    def test_three_regions_of_eleven(self):
        grid = [k / 10 for k in range(11)]
        regions = [make_region(value, 'tau2', rho_grid=grid) for value in (1, 10, 100)]
        self.assertEqual(len(self.read_lines(emit_csv(regions, self.tmp / 'b.csv'))), 34)

    def test_rewrite_is_byte_identical(self):
        first = emit_csv([make_region()], self.tmp / 'one.csv').read_bytes()
        second = emit_csv([make_region()], self.tmp / 'two.csv').read_bytes()
        self.assertEqual(first, second)

    def test_optional_columns(self):
        region = make_region(throughput_factor=0.5, mean_primary_empirical=np.ones(3),
                             stderr_primary_empirical=np.zeros(3))
        lines = self.read_lines(emit_csv([region], self.tmp / 'c.csv'))
        self.assertEqual(lines[0].split(',')[-3:],
                         ['primary_bound_eff_bpcu', 'secondary_bound_eff_bpcu', 'primary_empirical_bpcu'])
        self.assertEqual(lines[1].split(',')[-3:], ['0.561728', '0.0005', '1'])

    def test_throughput_columns_use_shared_discount(self):
        region = make_region(throughput_factor=0.25)
        with patch('cli.services.effective_throughput', wraps=effective_throughput) as discount:
            lines = self.read_lines(emit_csv([region], self.tmp / 'd.csv'))
        self.assertEqual(discount.call_count, 6)
        self.assertEqual(lines[1].split(',')[-2:], ['0.280864', '0.00025'])

    def test_out_of_range_throughput_factor(self):
        with self.assertRaises(ValueError):
            emit_csv([make_region(throughput_factor=1.5)], self.tmp / 'e.csv')

    def test_empty_regions(self):
        with self.assertRaises(ValueError):
            emit_csv([], self.tmp / 'x.csv')


class EmitPlotScriptTests(TempDirMixin, SimpleTestCase):

    def test_missing_csv(self):
        with self.assertRaises(FileNotFoundError):
            emit_plot_script(self.tmp / 'none.csv', self.tmp / 'plot.py')

    def test_script_reads_csv_and_compiles(self):
        csv_path = emit_csv([make_region(1, 'tau1'), make_region(10, 'tau1')], self.tmp / 'sweep_tau1.csv')
        script = emit_plot_script(csv_path, self.tmp / 'plot_sweep_tau1.py').read_text(encoding='utf-8')
        self.assertIn("'sweep_tau1.csv'", script)
        self.assertIn("'sweep_tau1.png'", script)
        self.assertIn('matplotlib', script)
        compile(script, 'plot_sweep_tau1.py', 'exec')


class HelperTests(SimpleTestCase):

    def test_dbm_conversion(self):
        self.assertAlmostEqual(dbm_to_watts(20.0), 0.1, places=15)
        self.assertAlmostEqual(dbm_to_watts(-110.0), 1e-14, delta=1e-26)
        self.assertAlmostEqual(watts_to_dbm(0.1), 20.0, places=12)
        with self.assertRaises(ValueError):
            watts_to_dbm(0.0)

    def test_parse_sweep_values(self):
        self.assertEqual(parse_sweep_values('1, 10,100,'), [1.0, 10.0, 100.0])
        with self.assertRaises(ConfigError):
            parse_sweep_values('1,ten')


class SymradCommandTests(TempDirMixin, SimpleTestCase):

    def call(self, *args):
        out = StringIO()
        call_command('symrad', *args, stdout=out, stderr=StringIO())
        return out.getvalue()

    def test_run_writes_outputs(self):
        config_path = self.write_json(SMALL_CONFIG)
        out_dir = self.tmp / 'out'
        stdout = self.call('run', '--config', str(config_path), '--out', str(out_dir), '--workers', '1',
                           '--emit-plot')
        lines = (out_dir / 'rate_region.csv').read_text(encoding='utf-8').splitlines()
        self.assertEqual(len(lines), 4)
        self.assertTrue((out_dir / 'plot_rate_region.py').is_file())
        manifest = json.loads((out_dir / 'manifest.json').read_text(encoding='utf-8'))
        self.assertEqual(manifest['config_digest'], load_config(config_path).digest())
        self.assertEqual(manifest['command'], 'run')
        self.assertIn('R_s bound', stdout)

    def test_seed_flag_overrides_config(self):
        config_path = self.write_json(SMALL_CONFIG)
        self.call('run', '--config', str(config_path), '--out', str(self.tmp / 'a'), '--seed', '99', '--workers', '1')
        manifest = json.loads((self.tmp / 'a' / 'manifest.json').read_text(encoding='utf-8'))
        self.assertEqual(manifest['config_digest'], load_config(config_path).with_overrides(seed=99).digest())

    def test_sweep_writes_one_block_per_value(self):
        config_path = self.write_json(SMALL_CONFIG)
        self.call('sweep', '--param', 'tau1', '--values', '1,10', '--config', str(config_path),
                  '--out', str(self.tmp), '--workers', '1')
        lines = (self.tmp / 'sweep_tau1.csv').read_text(encoding='utf-8').splitlines()
        self.assertEqual(len(lines), 7)
        self.assertEqual({line.split(',')[0] for line in lines[1:]}, {'tau1'})

    def test_check_prints_digest_stable_under_key_order(self):
        first = self.write_json('{"seed": 4, "num_trials": 20}', 'a.json')
        second = self.write_json('{"num_trials": 20, "seed": 4}', 'b.json')
        self.assertEqual(self.call('check', '--config', str(first)), self.call('check', '--config', str(second)))
        self.assertEqual(self.call('check', '--config', str(first)).strip(),
                         ScenarioConfig(seed=4, num_trials=20).digest())

    def test_invalid_config_exits_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('check', '--config', str(self.write_json({'alpha': 1.5})))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('alpha', str(ctx.exception))

    def test_malformed_json_exits_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('check', '--config', str(self.write_json('{"seed": }')))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('line 1', str(ctx.exception))

    def test_unknown_sweep_parameter_exits_with_one(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('sweep', '--param', 'gamma', '--values', '1', '--out', str(self.tmp))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_zero_reflection_exits_with_one(self):
        config_path = self.write_json(SMALL_CONFIG)
        with self.assertRaises(CommandError) as ctx:
            self.call('sweep', '--param', 'alpha', '--values', '0,0.5,1', '--config', str(config_path),
                      '--out', str(self.tmp), '--workers', '1')
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('alpha', str(ctx.exception))
        self.assertFalse((self.tmp / 'sweep_alpha.csv').exists())

        with self.assertRaises(CommandError) as ctx:
            self.call('run', '--config', str(self.write_json(dict(SMALL_CONFIG, alpha=0.0), 'zero.json')),
                      '--out', str(self.tmp), '--workers', '1')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_failed_campaign_exits_with_two(self):
        with patch('cli.management.commands.symrad.run_campaign', side_effect=CampaignError(['trial 0 failed'])):
            with self.assertRaises(CommandError) as ctx:
                self.call('run', '--out', str(self.tmp), '--workers', '1')
        self.assertEqual(ctx.exception.returncode, 2)

    @override_settings(DEBUG=False)
    def test_unexpected_error_hides_detail(self):
        with patch('cli.management.commands.symrad.run_campaign', side_effect=RuntimeError('boom')):
            with self.assertLogs('symrad', level='ERROR'):
                with self.assertRaises(CommandError) as ctx:
                    self.call('run', '--out', str(self.tmp), '--workers', '1')
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertNotIn('boom', str(ctx.exception))

    def test_dbm(self):
        self.assertEqual(self.call('dbm', '20').strip(), '0.1')
        self.assertEqual(self.call('dbm', '0.1', '--to-dbm').strip(), '20')
        with self.assertRaises(CommandError) as ctx:
            self.call('dbm', '0', '--to-dbm')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_grid_is_regenerated_for_num_aps(self):
        config = load_config(self.write_json(SMALL_CONFIG))
        self.assertEqual(sorted(config.ap_positions), sorted(grid_positions(2, 750)))
