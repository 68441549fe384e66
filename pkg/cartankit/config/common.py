import os

from configurations import Configuration

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def env_flag(name, default='no'):
    return os.getenv(name, default).strip().lower() in ('1', 'y', 'yes', 'true', 'on')


class Common(Configuration):
    INSTALLED_APPS = (
        'django.contrib.auth',
        'django.contrib.contenttypes',

        # Third party apps
        'rest_framework',

        # Your apps
        'cartankit.algebra',
        'cartankit.geometry',
    )
    SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'cartankit-insecure-local-key')
    ALLOWED_HOSTS = []

    # Reports are written to files or stdout; nothing is persisted
    DATABASES = {}

    # Celery
    CELERY_BROKER_URL = os.getenv('CELERY_BROKER_URL', 'redis://localhost:6379/0')
    CELERY_RESULT_BACKEND = os.getenv('CELERY_RESULT_BACKEND', 'redis://localhost:6379/0')
    CELERY_ACCEPT_CONTENT = ['json']
    CELERY_TASK_SERIALIZER = 'json'
    CELERY_RESULT_SERIALIZER = 'json'
    CELERY_ENABLE_UTC = True
    CELERY_WORKER_CONCURRENCY = int(os.getenv('CARTANKIT_THREADS', '1'))

    # Verification pipelines
    CARTANKIT_THREADS = int(os.getenv('CARTANKIT_THREADS', '1'))
    CARTANKIT_MAX_DISCARDS = int(os.getenv('CARTANKIT_MAX_DISCARDS', '10'))
    CARTANKIT_RATIONAL_HEIGHT = int(os.getenv('CARTANKIT_RATIONAL_HEIGHT', '9'))
    CARTANKIT_DEFAULT_SEED = int(os.getenv('CARTANKIT_DEFAULT_SEED', '0'))
    CARTANKIT_DEFAULT_SAMPLES = int(os.getenv('CARTANKIT_DEFAULT_SAMPLES', '100'))

    # General
    TIME_ZONE = 'UTC'
    LANGUAGE_CODE = 'en-us'
    USE_I18N = True
    USE_TZ = True
    DEBUG = env_flag('DJANGO_DEBUG')

    REST_FRAMEWORK = {
        'DEFAULT_RENDERER_CLASSES': ('rest_framework.renderers.JSONRenderer',),
    }

    # Logging
    LOGGING = {
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'verbose': {
                'format': '%(levelname)s %(asctime)s %(module)s %(process)d %(thread)d %(message)s'
            },
            'simple': {
                'format': '%(levelname)s %(message)s'
            },
        },
        'handlers': {
            'console': {
                'level': 'DEBUG',
                'class': 'logging.StreamHandler',
                'formatter': 'simple',
                'stream': 'ext://sys.stderr',
            },
        },
        'loggers': {
            'django': {
                'handlers': ['console'],
                'level': 'WARNING',
                'propagate': True,
            },
            'cartankit': {
                'handlers': ['console'],
                'level': os.getenv('CARTANKIT_LOG_LEVEL', 'WARNING'),
                'propagate': False,
            },
            'cartankit.geometry.services': {
                'handlers': ['console'],
                'level': os.getenv('CARTANKIT_LOG_LEVEL', 'INFO'),
                'propagate': False,
            },
            'cartankit.geometry.tasks': {
                'handlers': ['console'],
                'level': os.getenv('CARTANKIT_LOG_LEVEL', 'INFO'),
                'propagate': False,
            },
            'cartankit.geometry.management': {
                'handlers': ['console'],
                'level': 'INFO',
                'propagate': False,
            },
        }
    }
