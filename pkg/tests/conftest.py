import numpy as np
import pytest

from wbkin.model import bundled_model

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def arm6():
    return bundled_model("z1_like")


@pytest.fixture(scope="session")
def arm2():
    return bundled_model("planar_2r")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
