"""
Django settings for the panelforge project.
Committee-selection simulator: everything runs through manage.py commands.
"""

from pathlib import Path
import math
import os
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals; no web surface is served.
SECRET_KEY = config('SECRET_KEY', default='django-insecure-panelforge-simulation-only-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1', cast=lambda v: [s.strip() for s in v.split(',')])

# Application definition
INSTALLED_APPS = [
    'committees.apps.CommitteesConfig',
]

# Database - Default to SQLite for development
DATABASES = {
    'default': {
        'ENGINE': config('DB_ENGINE', default='django.db.backends.sqlite3'),
        'NAME': config('DB_NAME', default=BASE_DIR / 'db.sqlite3'),
        'USER': config('DB_USER', default=''),
        'PASSWORD': config('DB_PASSWORD', default=''),
        'HOST': config('DB_HOST', default=''),
        'PORT': config('DB_PORT', default=''),
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Simulator Configuration
PANELFORGE = {
    # Pivot eligibility threshold of the simplex (reduced costs and ratio-test entries)
    'LP_PIVOT_TOLERANCE': config('LP_PIVOT_TOLERANCE', default=1e-9, cast=float),
    # Absolute constraint residual accepted on an Optimal solution
    'LP_FEASIBILITY_TOLERANCE': config('LP_FEASIBILITY_TOLERANCE', default=1e-7, cast=float),
    'LP_MAX_ITERATIONS': config('LP_MAX_ITERATIONS', default=0, cast=int) or None,
    # Empirical-Bernstein constants
    'BERNSTEIN_B1': config('BERNSTEIN_B1', default=math.sqrt(2.0), cast=float),
    'BERNSTEIN_B2': config('BERNSTEIN_B2', default=7.0 / 3.0, cast=float),
    'T_MAX': config('PANELFORGE_T_MAX', default=10_000_000, cast=int),
    # Marginals/targets off by more than this are rejected instead of renormalized
    'MARGINAL_TOLERANCE': config('MARGINAL_TOLERANCE', default=5e-3, cast=float),
    'THREADS': config('PANELFORGE_THREADS', default=os.cpu_count() or 1, cast=int),
    'DEFAULT_DELTA': config('PANELFORGE_DELTA', default=0.1, cast=float),
}

LOG_LEVEL = config('LOG_LEVEL', default='INFO')

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
        'solver_formatter': {
            'format': '{levelname} {asctime} [SOLVER] {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': BASE_DIR / 'logs' / 'panelforge.log',
            'maxBytes': 1024*1024*15,  # 15MB
            'backupCount': 10,
            'formatter': 'verbose',
        },
        'solver_file': {
            'level': 'INFO',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': BASE_DIR / 'logs' / 'solver.log',
            'maxBytes': 1024*1024*20,  # 20MB
            'backupCount': 5,
            'formatter': 'solver_formatter',
        },
        'error_file': {
            'level': 'ERROR',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': BASE_DIR / 'logs' / 'error.log',
            'maxBytes': 1024*1024*10,  # 10MB
            'backupCount': 5,
            'formatter': 'verbose',
        },
        'console': {
            'level': config('CONSOLE_LOG_LEVEL', default='WARNING'),
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'committees': {
            'handlers': ['file', 'error_file', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'committees.lp': {
            'handlers': ['solver_file', 'error_file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'committees.cmdp': {
            'handlers': ['solver_file', 'error_file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'committees.policies': {
            'handlers': ['file', 'solver_file', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'committees.simulator': {
            'handlers': ['file', 'error_file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'committees.management': {
            'handlers': ['file', 'error_file', 'console'],
            'level': 'INFO',
            'propagate': False,
        },
    },
}

# Create logs directory if it doesn't exist
os.makedirs(BASE_DIR / 'logs', exist_ok=True)
