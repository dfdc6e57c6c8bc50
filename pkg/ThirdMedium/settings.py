"""
Django settings for ThirdMedium project.

Environment-driven values are read with python-decouple, so a ``.env`` file
next to manage.py or plain environment variables can override them.
"""

from pathlib import Path

from decouple import Csv, config

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-thirdmedium-change-this-in-production')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='', cast=Csv())

# Application definition
INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'core',  # solver, CLI and run registry
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'ThirdMedium.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'ThirdMedium.wsgi.application'

# Database - SQLite holds the run registry
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

# Static files (admin only)
STATIC_URL = '/static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Solver defaults; scenario configs override them per run
SOLVER = {
    'TOL_REL': config('TM_TOL_REL', default=1e-8, cast=float),
    # empty: 1e-12 * K * Lc^2 of the problem at hand
    'TOL_ABS': config('TM_TOL_ABS', default='', cast=lambda v: float(v) if v else None),
    'MAX_ITER': config('TM_MAX_ITER', default=25, cast=int),
    'MAX_BISECTIONS': config('TM_MAX_BISECTIONS', default=8, cast=int),
    'WORKERS': config('TM_WORKERS', default=1, cast=int),
    'PROVIDER': config('TM_PROVIDER', default='analytic'),
}

# Where `manage.py run` writes VTK series, probe CSVs and reports
OUTPUT_DIR = Path(config('TM_OUTPUT_DIR', default=str(BASE_DIR / 'output')))

# Long acceptance runs (Table-1 grid, pneumatic ramps) are skipped unless set
RUN_SLOW_TESTS = config('TM_RUN_SLOW_TESTS', default=False, cast=bool)

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
        'core': {
            'handlers': ['console'],
            'level': config('TM_LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
    },
}
