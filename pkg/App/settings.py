"""
Django settings for the ImNet simulator project.

The project serves no HTTP traffic: Django provides the settings layer,
the management-command CLI (imnet_check, imnet_run, imnet_diff_trace,
imnet_format), logging configuration and the test runner.

Every IMNET_* value can be overridden from the environment or a .env file
at the project root (see .env.example).
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'imnet-simulator-local-key')

DEBUG = os.getenv('DJANGO_DEBUG', 'false').lower() == 'true'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'Imnet',
]

# The simulator keeps its whole state in memory.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Simulator settings

# Table-miss behaviour: 'sendcontroller' or 'drop'
IMNET_DEFAULT_ACTION = os.getenv('IMNET_DEFAULT_ACTION', 'sendcontroller')

# sendall floods link neighbours unless this is set
IMNET_GLOBAL_BROADCAST = os.getenv('IMNET_GLOBAL_BROADCAST', 'false').lower() == 'true'

IMNET_HOP_BUDGET = os.getenv('IMNET_HOP_BUDGET', '64')

IMNET_LOG_LEVEL = os.getenv('IMNET_LOG_LEVEL', 'WARNING')


# Logging
# https://docs.djangoproject.com/en/5.1/topics/logging/

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'Imnet': {
            'handlers': ['console'],
            'level': IMNET_LOG_LEVEL,
            'propagate': False,
        },
    },
}
