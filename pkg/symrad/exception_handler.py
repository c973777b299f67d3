import json
import logging

from django.conf import settings
from django.core.management.base import CommandError
from rest_framework import serializers

from .exceptions import ConfigError, SymradError

logger = logging.getLogger(__name__)

EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


def _format_validation_detail(detail):
    if isinstance(detail, dict):
        return '; '.join(f"{key}: {_format_validation_detail(value)}" for key, value in detail.items())
    if isinstance(detail, list):
        return ', '.join(_format_validation_detail(item) for item in detail)
    return str(detail)


def command_exception_handler(exc, context):
    """Map an exception escaping a subcommand to a CommandError with an exit code."""
    subcommand = context.get('subcommand', '?')

    if isinstance(exc, CommandError):
        return exc

    if isinstance(exc, serializers.ValidationError):
        return CommandError(
            f"invalid configuration: {_format_validation_detail(exc.detail)}",
            returncode=EXIT_CONFIG_ERROR,
        )

    if isinstance(exc, json.JSONDecodeError):
        return CommandError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            returncode=EXIT_CONFIG_ERROR,
        )

    if isinstance(exc, (ConfigError, FileNotFoundError)):
        return CommandError(f"configuration error: {exc}", returncode=EXIT_CONFIG_ERROR)

    if isinstance(exc, SymradError):
        logger.error(f"Simulation failed in '{subcommand}': {exc}")
        return CommandError(str(exc), returncode=EXIT_RUNTIME_ERROR)

    logger.error(f"Unhandled exception in '{subcommand}'", exc_info=exc)

    detail = "internal error, rerun with DEBUG=True for details."
    if settings.DEBUG:
        detail = str(exc)

    return CommandError(detail, returncode=EXIT_RUNTIME_ERROR)
