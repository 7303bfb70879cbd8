import functools

import pytest

from ammlab.config import SimConfig
from ammlab.engine import replicate


@functools.lru_cache(maxsize=None)
def _paths(config: SimConfig):
    return replicate(config)


@pytest.fixture(scope="session")
def paths():
    """Replication paths for a config, computed once per test session."""
    return _paths


@pytest.fixture(scope="session")
def baseline():
    return SimConfig()
