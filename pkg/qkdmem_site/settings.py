"""
QKD Memory Simulator - Django Settings
"""
import os
import pathlib

import dj_database_url
from dotenv import load_dotenv


# Build paths
BASE_DIR = pathlib.Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

# Security Settings
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'a-fallback-unsafe-key-for-local-dev')
DEBUG = os.environ.get('DEBUG', 'False') == 'True'
ALLOWED_HOSTS = []

# Installed Apps
INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',

    # Local Apps
    'quantum_core.apps.QuantumCoreConfig',
    'devices.apps.DevicesConfig',
    'protocol.apps.ProtocolAppConfig',
    'analysis.apps.AnalysisConfig',
    'experiments.apps.ExperimentsConfig',
]

# Middleware and templates serve the ledger admin only
MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'qkdmem_site.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

# Database Configuration - run ledger, SQLite unless DATABASE_URL says otherwise
DATABASES = {
    'default': dj_database_url.config(
        default=os.environ.get('DATABASE_URL', f"sqlite:///{BASE_DIR / 'db.sqlite3'}"),
        conn_max_age=600
    )
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Default Primary Key Field Type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Logging
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
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': os.environ.get('MEMSIM_LOG_LEVEL', 'INFO'),
            'propagate': False,
        }
        for app in ('quantum_core', 'devices', 'protocol', 'analysis', 'experiments')
    },
}

# Numerical tolerances
QUANTUM_TOLERANCE = float(os.environ.get('QUANTUM_TOLERANCE', '1e-9'))  # structural invariants
QUANTUM_EXACT_TOLERANCE = float(os.environ.get('QUANTUM_EXACT_TOLERANCE', '1e-12'))  # analytic identities

# Exact branch enumeration limits
ENUMERATION_MAX_ROUNDS = int(os.environ.get('ENUMERATION_MAX_ROUNDS', '12'))
ENUMERATION_MAX_BRANCHES = int(os.environ.get('ENUMERATION_MAX_BRANCHES', str(2 ** 20)))

# Echo device: basis announced back as a bit
ECHO_BASIS_ENCODING = {'X': 0, 'Z': 1}

# Statistics
WILSON_CONFIDENCE = float(os.environ.get('WILSON_CONFIDENCE', '0.99'))

# Experiment output
TRANSCRIPT_SCHEMA_VERSION = 1
RANDOM_STREAM_ALGORITHM = 'numpy.PCG64(SeedSequence(seed XOR trial_index))'
EXPERIMENT_OUTPUT_DIR = pathlib.Path(os.environ.get('EXPERIMENT_OUTPUT_DIR', BASE_DIR / 'reports'))

# Device-level exact analyses run from transcripts enumerate at most this many rounds
DEVICE_ANALYSIS_MAX_ROUNDS = int(os.environ.get('DEVICE_ANALYSIS_MAX_ROUNDS', '8'))
