"""
DBNode - Django Settings
"""

import os
from pathlib import Path

from decouple import config, Csv  # type: ignore

BASE_DIR = Path(__file__).resolve().parent.parent

# =============================================================================
# CORE SETTINGS
# =============================================================================

DEBUG = config("DEBUG", default=False, cast=bool)
ENVIRONMENT = config("ENVIRONMENT", default="development")
TESTING = config("TESTING", default=False, cast=bool)

SECRET_KEY = config("SECRET_KEY", default="change-this-in-production")

ALLOWED_HOSTS = config(
    "ALLOWED_HOSTS", default="localhost,127.0.0.1", cast=Csv()
)

SITE_NAME = config("SITE_NAME", default="DBNode")

# =============================================================================
# APPLICATIONS
# =============================================================================

DJANGO_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
]

THIRD_PARTY_APPS = [
    "rest_framework",
]

if config("ENABLE_DJANGO_EXTENSIONS", default=False, cast=bool):
    THIRD_PARTY_APPS.append("django_extensions")

LOCAL_APPS = [
    "apps.core",
    "apps.erasure",
    "apps.hashslot",
    "apps.placement",
    "apps.ledger",
    "apps.nodes",
    "apps.simnet",
    "apps.protocol",
    "apps.cluster",
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

# =============================================================================
# MIDDLEWARE
# =============================================================================

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "dbn.urls"

# =============================================================================
# TEMPLATES
# =============================================================================

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

WSGI_APPLICATION = "dbn.wsgi.application"

# =============================================================================
# DATABASE (ledger + cluster registry)
# =============================================================================

import dj_database_url  # type: ignore  # noqa: E402

DATABASE_URL = config(
    "DATABASE_URL", default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}"
)
DATABASES = {"default": dj_database_url.parse(DATABASE_URL)}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# =============================================================================
# I18N / TZ
# =============================================================================

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = True
USE_TZ = True

# =============================================================================
# STATIC & NODE STORAGE
# =============================================================================

STATIC_ROOT = config(
    "STATIC_ROOT", default=os.path.join(BASE_DIR, "staticfiles"))
STATIC_URL = "/static/"

# One sub-directory per DBNode, one file per chunk hash.
NODE_STORAGE_ROOT = config(
    "NODE_STORAGE_ROOT", default=os.path.join(BASE_DIR, "var", "nodes"))

# =============================================================================
# DBNODE DEFAULTS
# =============================================================================

DBNODE = {
    "CHANNEL": config("DBNODE_CHANNEL", default="fc"),
    "CHUNK_SIZE": config(
        "DBNODE_DEFAULT_CHUNK_SIZE", default=1_000_000, cast=int),
    "TRIALS": config("DBNODE_TRIALS", default=20, cast=int),
    "CLIENT_BANDWIDTH_MBPS": config(
        "DBNODE_CLIENT_BANDWIDTH_MBPS", default=4000, cast=int),
    "RTT_INTRA_MS": config("DBNODE_RTT_INTRA_MS", default=1.0, cast=float),
    "RTT_INTER_MS": config("DBNODE_RTT_INTER_MS", default=10.0, cast=float),
    "SEED": config("DBNODE_SEED", default=7, cast=int),
    # file sizes for bench_latency, in MB
    "BENCH_SIZES_MB": [10, 20, 30, 100, 200, 300],
    "STEPPED_BANDWIDTHS_MBPS": [400, 800, 1200, 1600],
    "UNIFORM_BANDWIDTH_MBPS": 1000,
}

# =============================================================================
# DRF
# =============================================================================

REST_FRAMEWORK = {
    "DEFAULT_PERMISSION_CLASSES": [
        "rest_framework.permissions.IsAdminUser",
    ],
}

# =============================================================================
# LOGGING
# =============================================================================

LOG_LEVEL = config("LOG_LEVEL", default="INFO")
LOG_FILE_PATH = config("LOG_FILE_PATH", default="logs/dbnode.log")
os.makedirs(os.path.dirname(LOG_FILE_PATH), exist_ok=True)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {module} {message}",
            "style": "{",
        },
        "simple": {
            "format": "{levelname} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
        "file": {
            "class": "logging.handlers.RotatingFileHandler",
            "filename": LOG_FILE_PATH,
            "maxBytes": config(
                "LOG_MAX_SIZE_MB", default=100, cast=int
            ) * 1024 * 1024,
            "backupCount": config("LOG_BACKUP_COUNT", default=5, cast=int),
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console", "file"],
        "level": LOG_LEVEL,
    },
    "loggers": {
        "django": {
            "handlers": ["console", "file"],
            "level": LOG_LEVEL,
            "propagate": False,
        },
        "apps": {
            "handlers": ["console", "file"],
            "level": config("DBNODE_LOG_LEVEL", default=LOG_LEVEL),
            "propagate": False,
        },
    },
}

# =============================================================================
# SENTRY
# =============================================================================

SENTRY_DSN = config("SENTRY_DSN", default=None)
if SENTRY_DSN:
    import sentry_sdk
    from sentry_sdk.integrations.django import DjangoIntegration
    from sentry_sdk.integrations.celery import CeleryIntegration

    sentry_sdk.init(
        dsn=SENTRY_DSN,
        integrations=[DjangoIntegration(), CeleryIntegration()],
        traces_sample_rate=0.1,
        send_default_pii=False,
        environment=ENVIRONMENT,
    )

# =============================================================================
# CELERY
# =============================================================================

CELERY_BROKER_URL = config("CELERY_BROKER_URL", default="memory://")
CELERY_RESULT_BACKEND = config("CELERY_RESULT_BACKEND", default="cache+memory://")
CELERY_TASK_ALWAYS_EAGER = config(
    "CELERY_TASK_ALWAYS_EAGER", default=True, cast=bool)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_TIMEZONE = TIME_ZONE
CELERY_BROKER_CONNECTION_RETRY_ON_STARTUP = True
