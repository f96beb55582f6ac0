"""
Django settings for FactoidEntailment_project project.

The project hosts no web service: the apps expose their pipeline through
management commands (see explain/management/commands).

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path
from dotenv import load_dotenv
import os

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv(
    "SECRET_KEY", "django-insecure-factoid-entailment-local-development-key"
)

DEBUG = os.getenv("DEBUG", "True") == "True"

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    # Third Party
    "rest_framework",
    # Local
    "kb.apps.KbConfig",
    "apriori.apps.AprioriConfig",
    "rewrite.apps.RewriteConfig",
    "kernel.apps.KernelConfig",
    "logifun.apps.LogifunConfig",
    "fol.apps.FolConfig",
    "reason.apps.ReasonConfig",
    "evaluation.apps.EvaluationConfig",
    "explain.apps.ExplainConfig",
]

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [],
        },
    },
]

# Database
# The engine keeps everything in memory; sqlite only satisfies contrib apps.
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

# Knowledge base and engine bounds
KB_PATH = os.getenv("KB_PATH", str(BASE_DIR / "kb" / "fixtures" / "kb.json"))
ATOM_CAP = int(os.getenv("ATOM_CAP", 20))
EXPANSION_BOUND = int(os.getenv("EXPANSION_BOUND", 64))
MEU_FUZZY_THRESHOLD = float(os.getenv("MEU_FUZZY_THRESHOLD", 0.8))
GEONAMES_MULTIPLIER = float(os.getenv("GEONAMES_MULTIPLIER", 0.8))
EVALUATION_WORKERS = int(os.getenv("EVALUATION_WORKERS", 4))
KMEDOIDS_MAX_ITER = int(os.getenv("KMEDOIDS_MAX_ITER", 300))
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Logging
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {name} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        app: {"handlers": ["console"], "level": LOG_LEVEL, "propagate": False}
        for app in (
            "kb",
            "apriori",
            "rewrite",
            "kernel",
            "logifun",
            "fol",
            "reason",
            "evaluation",
            "explain",
        )
    },
}

# Internationalization
LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = True
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"
