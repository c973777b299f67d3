"""
Django settings for the symrad project.

The project hosts a link-level Monte Carlo simulator for cell-free symbiotic
radio. There is no web surface and no database; Django provides the app
registry, the settings layer, logging configuration, the template engine used
for plot scripts, the management-command CLI and the test runner.
"""

from pathlib import Path
from decouple import config
import os


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='symrad-insecure-local-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'math_kernels',
    'scenario',
    'channel',
    'estimation',
    'beamforming',
    'rates',
    'montecarlo',
    'cli',
]

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'autoescape': False,
        },
    },
]

# No persistence: campaigns are written to CSV/JSON files only.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Simulation runtime knobs (never part of the experiment digest)
SYMRAD_WORKERS = config('SYMRAD_WORKERS', default=1, cast=int)
SYMRAD_OUTPUT_DIR = config('SYMRAD_OUTPUT_DIR', default='results')
SYMRAD_LOG_LEVEL = config('SYMRAD_LOG_LEVEL', default='INFO')
SYMRAD_LOG_TO_FILE = config('SYMRAD_LOG_TO_FILE', default=False, cast=bool)

# Logging Configuration
LOGS_DIR = BASE_DIR / 'logs'

LOG_HANDLERS = ['console']
if SYMRAD_LOG_TO_FILE:
    os.makedirs(LOGS_DIR, exist_ok=True)
    LOG_HANDLERS.append('file')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
        'file': {
            'class': 'logging.FileHandler',
            'filename': LOGS_DIR / 'symrad.log',
            'formatter': 'verbose',
            'delay': True,
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': LOG_HANDLERS,
            'level': 'WARNING',
            'propagate': False,
        },
        'montecarlo': {
            'handlers': LOG_HANDLERS,
            'level': SYMRAD_LOG_LEVEL,
            'propagate': False,
        },
        'estimation': {
            'handlers': LOG_HANDLERS,
            'level': SYMRAD_LOG_LEVEL,
            'propagate': False,
        },
        'cli': {
            'handlers': LOG_HANDLERS,
            'level': SYMRAD_LOG_LEVEL,
            'propagate': False,
        },
        'symrad': {
            'handlers': LOG_HANDLERS,
            'level': SYMRAD_LOG_LEVEL,
            'propagate': False,
        },
    },
}
