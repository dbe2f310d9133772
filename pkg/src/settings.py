"""
Django settings for the hypocal project.
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-change-me-in-production')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS: list[str] = []

# Application definition
INSTALLED_APPS = [
    'rest_framework',
    'hypocal',
]

# No persistence: calibrations are batch runs writing files only
DATABASES: dict = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# REST Framework settings (serializers validate configs, renderer writes reports)
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'STRICT_JSON': True,
    'UNICODE_JSON': True,
    'COMPACT_JSON': False,
    # django.contrib.auth is not installed
    'UNAUTHENTICATED_USER': None,
}

# Calibration defaults
HYPOCAL_SEED = config('HYPOCAL_SEED', default=None, cast=lambda v: None if v in (None, '') else int(v))
HYPOCAL_THREADS = config('HYPOCAL_THREADS', default=1, cast=int)
HYPOCAL_OUTPUT_DIR = config('HYPOCAL_OUTPUT_DIR', default='hypocal-output')
HYPOCAL_LOG_LEVEL = config('HYPOCAL_LOG_LEVEL', default='INFO')

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'hypocal': {
            'handlers': ['console'],
            'level': HYPOCAL_LOG_LEVEL,
            'propagate': False,
        },
    },
}
