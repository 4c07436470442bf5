import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stenzel_slag.potential import build_potential

settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("numeric")


@pytest.fixture(scope="session")
def pot5():
    return build_potential(5, 1.0)


@pytest.fixture(scope="session")
def pot6():
    return build_potential(6, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
