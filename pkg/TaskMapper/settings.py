from pathlib import Path

from decouple import Choices, config

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='django-insecure-taskmapper-desarrollo-local')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'APPMODEL',
    'PLATFORMS',
    'MAPPING',
    'SIMKERNEL',
    'METRICS',
    'TRACES',
    'WORKFLOW',
]

DATABASES = {
    'default': {
        'ENGINE': config('DB_ENGINE', default='django.db.backends.sqlite3'),
        'NAME': config('DB_NAME', default=str(BASE_DIR / 'taskmapper.sqlite3')),
        'USER': config('DB_USER', default=''),
        'PASSWORD': config('DB_PASSWORD', default=''),
        'HOST': config('DB_HOST', default=''),
        'PORT': config('DB_PORT', default=''),
    }
}

LANGUAGE_CODE = 'es-mx'

TIME_ZONE = 'America/Mexico_City'

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Logging: TASKMAPPER_LOG = off | info | debug
TASKMAPPER_LOG = config('TASKMAPPER_LOG', default='info', cast=Choices(['off', 'info', 'debug']))

_LOG_LEVELS = {
    'off': 'CRITICAL',
    'info': 'INFO',
    'debug': 'DEBUG',
}

_PROJECT_LOGGERS = ['TaskMapper', 'APPMODEL', 'PLATFORMS', 'MAPPING', 'SIMKERNEL', 'METRICS', 'TRACES', 'WORKFLOW']

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'color': {
            '()': 'colorlog.ColoredFormatter',
            'format': '%(log_color)s%(levelname)-8s%(reset)s %(cyan)s%(name)s%(reset)s %(message)s',
            'log_colors': {
                'DEBUG': 'blue',
                'INFO': 'green',
                'WARNING': 'yellow',
                'ERROR': 'red',
                'CRITICAL': 'bold_red',
            },
        },
    },
    'handlers': {
        'stderr': {
            'class': 'logging.StreamHandler',
            'formatter': 'color',
            'stream': 'ext://sys.stderr',
        },
        'null': {
            'class': 'logging.NullHandler',
        },
    },
    'loggers': {
        name: {
            'handlers': ['null'] if TASKMAPPER_LOG == 'off' else ['stderr'],
            'level': _LOG_LEVELS[TASKMAPPER_LOG],
            'propagate': False,
        }
        for name in _PROJECT_LOGGERS
    },
}

# Configuración específica de la simulación
REFERENCE_PLATFORMS_DIR = BASE_DIR / 'platforms'
REFERENCE_MAPPINGS_DIR = BASE_DIR / 'mappings'
REFERENCE_APPLICATIONS_DIR = BASE_DIR / 'applications'

# Auditoría de invariantes del kernel (capacidad y conservación en cada paso)
TASKMAPPER_AUDIT = config('TASKMAPPER_AUDIT', default=False, cast=bool)

# Incluir el tiempo de pared medido en los CSV (rompe la reproducibilidad byte a byte)
TASKMAPPER_WALL_TIME = config('TASKMAPPER_WALL_TIME', default=False, cast=bool)

# Tolerancia relativa para agrupar finalizaciones simultáneas
KERNEL_TIME_TOLERANCE = 1e-12

CSV_SIGNIFICANT_DIGITS = 9
TRACE_DECIMALS = 9

# Perfiles por defecto de la aplicación eScience (unidades de trabajo y bytes)
ESCIENCE_WORK_PROFILE = {
    'load_experimental_data': 5e6,
    'adapt_state': 5e6,
    'generate_individuals': 1e7,
    'generate_input_datasets': 1e7,
    'ms2': 3e7,
    'calculate_fitness': 2e7,
    'rank_individuals': 1e7,
    'check_termination': 5e6,
}

ESCIENCE_LABEL_PROFILE = {
    'experimental': 100_000,
    'state': 1_000_000,
    'individuals': 1_000_000,
    'input': 625_000,
    'output': 625_000,
    'fitness': 1_000_000,
    'ranking': 100_000,
}

# Procesos de trabajo por defecto para el evaluador por lotes
BATCH_DEFAULT_JOBS = config('BATCH_DEFAULT_JOBS', default=1, cast=int)

# Método de arranque del pool (fork, spawn, forkserver); vacío usa el de la plataforma
BATCH_START_METHOD = config('BATCH_START_METHOD', default='', cast=Choices(['', 'fork', 'spawn', 'forkserver'])) or None

MAX_BATCH_SIZE = 100_000
