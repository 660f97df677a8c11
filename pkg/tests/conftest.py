import pytest

from doublesine import builtin


@pytest.fixture(scope="session")
def osc():
    return builtin("oscillating_quadratic")


@pytest.fixture(scope="session")
def mod3():
    return builtin("mod3_log_product")


@pytest.fixture(scope="session")
def pp22():
    return builtin("product_power", p=2.0, q=2.0)


@pytest.fixture(scope="session")
def pp11():
    return builtin("product_power", p=1.0, q=1.0)


@pytest.fixture(scope="session")
def zero_seq():
    return builtin("zero")
