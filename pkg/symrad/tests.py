import json

from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings
from rest_framework import serializers

from .exception_handler import EXIT_CONFIG_ERROR, EXIT_RUNTIME_ERROR, command_exception_handler
from .exceptions import (
    AntiparallelBeamformerError,
    CampaignError,
    ConfigError,
    DegenerateBeamformerError,
    TrialError,
)


class ExceptionTests(SimpleTestCase):

    def test_config_error_names_key(self):
        exc = ConfigError('alpha', "must lie in [0, 1]")
        self.assertEqual(str(exc), "alpha: must lie in [0, 1]")
        self.assertEqual(exc.key, 'alpha')

    def test_degenerate_beamformer_is_a_value_error(self):
        exc = AntiparallelBeamformerError("cancelled", ap_index=4)
        self.assertIsInstance(exc, DegenerateBeamformerError)
        self.assertIsInstance(exc, ValueError)
        self.assertEqual(str(exc), "AP 4: cancelled")

    def test_campaign_error_summarizes_failures(self):
        failures = [str(TrialError(i, 0.5, "boom")) for i in range(7)]
        message = str(CampaignError(failures))
        self.assertTrue(message.startswith("7 trial(s) failed"))
        self.assertIn("(+2 more)", message)


class CommandExceptionHandlerTests(SimpleTestCase):
    context = {'subcommand': 'run'}

    def test_validation_error(self):
        exc = serializers.ValidationError({'alpha': ["Ensure this value is less than or equal to 1.0."]})
        error = command_exception_handler(exc, self.context)
        self.assertEqual(error.returncode, EXIT_CONFIG_ERROR)
        self.assertIn('alpha', str(error))

    def test_parse_error(self):
        try:
            json.loads('{\n"a": 1,,}')
        except json.JSONDecodeError as exc:
            error = command_exception_handler(exc, self.context)
        self.assertEqual(error.returncode, EXIT_CONFIG_ERROR)
        self.assertIn('line 2', str(error))

    def test_config_and_missing_file(self):
        for exc in (ConfigError('seed', "negative"), FileNotFoundError('config.json')):
            self.assertEqual(command_exception_handler(exc, self.context).returncode, EXIT_CONFIG_ERROR)

    def test_simulation_error(self):
        with self.assertLogs('symrad', level='ERROR'):
            error = command_exception_handler(CampaignError(["trial 1 failed"]), self.context)
        self.assertEqual(error.returncode, EXIT_RUNTIME_ERROR)

    def test_command_error_passes_through(self):
        original = CommandError("already mapped", returncode=1)
        self.assertIs(command_exception_handler(original, self.context), original)

    @override_settings(DEBUG=True)
    def test_debug_shows_detail(self):
        with self.assertLogs('symrad', level='ERROR'):
            error = command_exception_handler(KeyError('missing'), self.context)
        self.assertIn('missing', str(error))
        self.assertEqual(error.returncode, EXIT_RUNTIME_ERROR)
