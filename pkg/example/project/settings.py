"""
Django settings for the CatEquiv example project.

Minimal project that hosts the `catequiv` management commands
(train, eval, sweep, ablate, verify). It also serves as the test settings.
"""

import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = "example-secret-key-change-in-production"

DEBUG = True

ALLOWED_HOSTS = ["*"]

INSTALLED_APPS = [
    # Django contrib
    "django.contrib.contenttypes",
    "django.contrib.auth",
    # Third-party
    "rest_framework",
    # CatEquiv core
    "catequiv",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.middleware.common.CommonMiddleware",
]

ROOT_URLCONF = "example.project.urls"

TEMPLATES = []

WSGI_APPLICATION = "example.project.wsgi.application"

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

AUTH_PASSWORD_VALIDATORS = []

LANGUAGE_CODE = "pt-br"
TIME_ZONE = "America/Sao_Paulo"
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# CatEquiv
CATEQUIV = {
    "DATA_ROOT": os.environ.get("CATEQUIV_DATA_ROOT"),
    "OUTPUT_ROOT": str(BASE_DIR.parent / "runs"),
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "simple"},
    },
    "loggers": {
        "catequiv": {
            "handlers": ["console"],
            "level": os.environ.get("CATEQUIV_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}
