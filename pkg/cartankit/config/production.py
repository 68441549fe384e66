import os

from .common import Common


class Production(Common):
    SECRET_KEY = os.getenv('DJANGO_SECRET_KEY')

    # Workers share the broker; chunk results come back through the result backend
    CELERY_BROKER_URL = os.getenv('CELERY_BROKER_URL', 'redis://redis:6379/0')
    CELERY_RESULT_BACKEND = os.getenv('CELERY_RESULT_BACKEND', 'redis://redis:6379/0')
    CELERY_TASK_ALWAYS_EAGER = False
