from .local import Local  # noqa
from .production import Production  # noqa
