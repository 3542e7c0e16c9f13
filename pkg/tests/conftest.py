import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dbel.samples import MultivariateSample

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_pair(rng, n, m, p=2):
    return (MultivariateSample(rng.normal(size=(n, p))),
            MultivariateSample(rng.normal(size=(m, p))))
