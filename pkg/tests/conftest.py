import pytest
from hypothesis import HealthCheck, settings

from oracles import random_params

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid():
    return random_params(1000, seed=20240607)
