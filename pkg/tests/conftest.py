import numpy as np
import pytest

from stressnet import settings


@pytest.fixture
def cfg():
    """The global configuration, restored to its defaults afterwards."""
    yield settings.CFG
    settings.CFG.reset()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
