import numpy as np
import pytest

from hardylab.correcting import build_correcting_factor, psi_exponential
from hardylab.corpus import demo_field, demo_tau
from hardylab.embedding import Workspace


@pytest.fixture(scope="session")
def demo_f():
    return demo_field()


@pytest.fixture(scope="session")
def demo_t():
    return demo_tau()


@pytest.fixture(scope="session")
def demo_ws(demo_f):
    return Workspace.build(demo_f)


@pytest.fixture(scope="session")
def exp_M():
    return build_correcting_factor(psi_exponential())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
