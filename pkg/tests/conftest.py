import pytest
from hypothesis import HealthCheck, settings

from yuanlab.algebra import monomial_algebra, truncated_algebra
from yuanlab.gf import make_field

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def F2():
    return make_field(2)


@pytest.fixture
def F3():
    return make_field(3)


@pytest.fixture
def C22(F2):
    """F_2[x,y]/(x^2, y^2)."""
    return truncated_algebra(F2, 2)


@pytest.fixture
def X4(F2):
    """F_2[x]/(x^4)."""
    return monomial_algebra(F2, [4])
