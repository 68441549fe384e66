from .common import Common


class Local(Common):
    DEBUG = True

    # Fan-outs run in-process; no broker needed
    CELERY_TASK_ALWAYS_EAGER = True
    CELERY_TASK_EAGER_PROPAGATES = True
    CELERY_BROKER_URL = 'memory://'
    CELERY_RESULT_BACKEND = 'cache+memory://'
