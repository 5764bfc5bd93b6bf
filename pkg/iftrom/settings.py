"""
Django settings for the iftrom project.

The project has no HTTP surface: the `tracking` app exposes the reduced-order
modelling library through management commands and keeps a run registry in
the database configured by DATABASE_URL.
"""

import os
from pathlib import Path

import dj_database_url

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'dev-secret-key')

DEBUG = os.environ.get('DJANGO_DEBUG', 'True').lower() == 'true'

ALLOWED_HOSTS: list[str] = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'tracking',
]


# Database

DATABASES = {
    'default': dj_database_url.parse(
        os.environ.get('DATABASE_URL', f'sqlite:///{BASE_DIR / "db.sqlite3"}'),
        conn_max_age=600,
    )
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Reduced-order modelling

IFTROM_OUTPUT_ROOT = Path(os.environ.get('IFTROM_OUTPUT_ROOT', BASE_DIR / 'runs'))

IFTROM_WORKERS = int(os.environ.get('IFTROM_WORKERS', '1'))

IFTROM_LOG_LEVEL = os.environ.get('IFTROM_LOG_LEVEL', 'INFO').upper()

IFTROM_SOLVER_DEFAULTS = {
    'eps1': 1e-8,
    'eps2': 1e-8,
    'max_iterations': 200,
    'newton_tol': 1e-10,
    'newton_max_iterations': 50,
    'distortion_eps': 1e-8,
    'armijo': 1e-4,
    'curvature': 0.9,
    'max_halvings': 30,
}


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'solver': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'solver',
        },
    },
    'loggers': {
        'tracking': {
            'handlers': ['console'],
            'level': IFTROM_LOG_LEVEL,
            'propagate': False,
        },
    },
}
