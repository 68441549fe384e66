import pytest


# Pin pipeline defaults regardless of CARTANKIT_* environment variables.
@pytest.fixture(autouse=True)
def pinned_pipeline_settings(settings):
    settings.CARTANKIT_THREADS = 1
    settings.CARTANKIT_MAX_DISCARDS = 10
    settings.CARTANKIT_RATIONAL_HEIGHT = 9
    settings.CARTANKIT_DEFAULT_SEED = 0
    settings.CARTANKIT_DEFAULT_SAMPLES = 10
