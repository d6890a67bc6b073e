"""
Django settings for the loopaccel project.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'loopaccel-insecure-change-me')

DEBUG = os.getenv('DJANGO_DEBUG', 'False').lower() == 'true'

ALLOWED_HOSTS = []

# Application definition
THIRD_PARTY_APPS = [
    'rest_framework',
]

LOCAL_APPS = [
    'expr',
    'loops',
    'closedform',
    'solver',
    'accel',
    'nonterm',
    'oracle',
    'cli',
]

INSTALLED_APPS = THIRD_PARTY_APPS + LOCAL_APPS

# No persistence: every analysis is a pure function of its input file.
DATABASES = {}

USE_TZ = True

# REST Framework configuration (serializers and JSON rendering only)
REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
    'UNICODE_JSON': False,
}

# Corpus of example loops shipped with the repository
LOOPACCEL_CORPUS_DIR = BASE_DIR / 'corpus'

# SMT solver
LOOPACCEL_SMT_BIN = os.getenv('LOOPACCEL_SMT_BIN', 'z3')
LOOPACCEL_SMT_ARGS = os.getenv('LOOPACCEL_SMT_ARGS', '-smt2 -in').split()
LOOPACCEL_TIMEOUT_MS = int(os.getenv('LOOPACCEL_TIMEOUT_MS', '10000'))

# Oracle bounds; an unset box falls back to 3 (d <= 3) or 2 (d >= 4)
LOOPACCEL_VERIFY_BOX = int(os.getenv('LOOPACCEL_VERIFY_BOX')) if os.getenv('LOOPACCEL_VERIFY_BOX') else None
LOOPACCEL_VERIFY_MAX_N = int(os.getenv('LOOPACCEL_VERIFY_MAX_N', '10'))
LOOPACCEL_SIM_STEPS = int(os.getenv('LOOPACCEL_SIM_STEPS', '1000'))
LOOPACCEL_EXTRA_MODELS = int(os.getenv('LOOPACCEL_EXTRA_MODELS', '10'))

LOOPACCEL_LOG_LEVEL = os.getenv('LOOPACCEL_LOG_LEVEL', 'WARNING').upper()

# Logging (stderr only; stdout carries rendered results)
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOOPACCEL_LOG_LEVEL,
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
        **{
            app: {
                'handlers': ['console'],
                'level': 'DEBUG' if DEBUG else LOOPACCEL_LOG_LEVEL,
                'propagate': False,
            }
            for app in LOCAL_APPS
        },
    },
}
