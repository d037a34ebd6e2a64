import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qgeo", max_examples=60, deadline=None)
settings.load_profile("qgeo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
