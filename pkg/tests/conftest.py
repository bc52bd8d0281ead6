import pytest

from fdnet.kernels import KernelContext
from fdnet.network import AntennaConfig, default_params
from fdnet.si import SiChannel, gamma_fit


@pytest.fixture
def params():
    return default_params()


@pytest.fixture
def ctx(params):
    return KernelContext(params)


@pytest.fixture
def si():
    return SiChannel(1.0, 1e-6)


@pytest.fixture
def fit22(si):
    return gamma_fit(si, AntennaConfig(2, 2))


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.LINES):
            terminalreporter.write_line(test_acceptance.LINES[key])
