import numpy as np
import pytest

from coopmsr import build_descriptor, create_field, derive_params

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def gf16():
    return create_field(4)


@pytest.fixture(scope="session")
def ex1(gf16):
    """The (6, 3, 4, h=2) code with w^i evaluation points and gamma = 1/(1+w)."""
    params = derive_params(6, 3, 4, [2])
    return build_descriptor(params, gamma=gf16.inv(gf16.add(1, 2)))


@pytest.fixture(scope="session")
def code846():
    return build_descriptor(derive_params(8, 4, 6, [2]))


@pytest.fixture(scope="session")
def code735():
    return build_descriptor(derive_params(7, 3, 5, [2]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
