"""
Django settings for the QASL toolkit project.

Everything tunable comes from the environment. Library code reads the
`QASL` block through `corpus.conf.qasl_setting`, so the same defaults apply
when modules are used outside a management command.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    "DJANGO_SECRET_KEY", "django-insecure-default-key-change-this"
)

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get("DJANGO_DEBUG", "False") == "True"

ALLOWED_HOSTS = os.environ.get("DJANGO_ALLOWED_HOSTS", "localhost,127.0.0.1").split(",")


# Application definition

INSTALLED_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
    "corpus",
    "modeling",
    "scoring",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "config.urls"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.debug",
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]

WSGI_APPLICATION = "config.wsgi.application"


# Database
# Postgres when POSTGRES_DB is set (docker-compose), otherwise a local SQLite
# file for desk runs and the test suite.

if os.environ.get("POSTGRES_DB"):
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.postgresql",
            "NAME": os.environ.get("POSTGRES_DB"),
            "USER": os.environ.get("POSTGRES_USER", "postgres"),
            "PASSWORD": os.environ.get("POSTGRES_PASSWORD", "postgres"),
            "HOST": os.environ.get("DB_HOST", "db"),
            "PORT": os.environ.get("DB_PORT", "5432"),
        }
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": os.environ.get("QASL_SQLITE_PATH", str(BASE_DIR / "qasl.sqlite3")),
        }
    }


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True


# Static files (admin only)

STATIC_URL = "static/"
STATIC_ROOT = BASE_DIR / "staticfiles"

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Logging

QASL_LOG_LEVEL = os.environ.get("QASL_LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "console": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "console",
        },
    },
    "loggers": {
        "corpus": {"handlers": ["console"], "level": QASL_LOG_LEVEL, "propagate": True},
        "modeling": {"handlers": ["console"], "level": QASL_LOG_LEVEL, "propagate": True},
        "scoring": {"handlers": ["console"], "level": QASL_LOG_LEVEL, "propagate": True},
    },
}


# QASL defaults

QASL = {
    # Stage 1 (QA-tuning)
    "STAGE1_LEARNING_RATE": float(os.environ.get("QASL_STAGE1_LR", "3e-5")),
    "STAGE1_BATCH_SIZE": int(os.environ.get("QASL_STAGE1_BATCH", "24")),
    "STAGE1_EPOCHS": int(os.environ.get("QASL_STAGE1_EPOCHS", "2")),
    # Stage 2 (QASL-tuning)
    "STAGE2_LEARNING_RATE": float(os.environ.get("QASL_STAGE2_LR", "2e-5")),
    "STAGE2_BATCH_SIZE": int(os.environ.get("QASL_STAGE2_BATCH", "32")),
    "STAGE2_EPOCHS": int(os.environ.get("QASL_STAGE2_EPOCHS", "10")),
    # Adapters
    "ADAPTER_LEARNING_RATE": float(os.environ.get("QASL_ADAPTER_LR", "1e-3")),
    "ADAPTER_REDUCTION_FACTOR": int(os.environ.get("QASL_ADAPTER_FACTOR", "16")),
    "ADAPTER_BOUNDARY_REDUCTION_FACTOR": int(
        os.environ.get("QASL_ADAPTER_BOUNDARY_FACTOR", "8")
    ),
    # Decoding
    "MAX_SPAN_TOKENS": int(os.environ.get("QASL_MAX_SPAN_TOKENS", "30")),
    "NO_ANSWER_THRESHOLD": float(os.environ.get("QASL_NO_ANSWER_THRESHOLD", "0.0")),
    # Reformulation
    "SEPARATOR_TOKEN": os.environ.get("QASL_SEPARATOR_TOKEN", "<s>"),
    "CONTEXT_MODE": os.environ.get("QASL_CONTEXT_MODE", "user_only"),
    # Audit (unset = never fail on findings)
    "AUDIT_MAX_FINDINGS": (
        int(os.environ["QASL_AUDIT_MAX_FINDINGS"])
        if os.environ.get("QASL_AUDIT_MAX_FINDINGS")
        else None
    ),
    # Ledger
    "RECORD_RUNS": os.environ.get("QASL_RECORD_RUNS", "True") == "True",
}
