import pytest

from memest.moments import PopulationParams, read_params
from memest.report import REFERENCE_PARAMS, data_path

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ref_params():
    return read_params(data_path(REFERENCE_PARAMS))


@pytest.fixture(scope="session")
def ref_params_literal():
    """The reference parameter row typed in directly, independent of the bundled file."""
    return PopulationParams(mu_y=127, mu_x=170, sigma2_y=1278, sigma2_x=3300, rho=0.964,
                            sigma2_u=36, sigma2_v=36, n=10, N=10)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
