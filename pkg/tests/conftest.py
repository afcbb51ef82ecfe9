import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ellcov import two_sheet_covering
from ellcov.verify import seeded_coupled_state

settings.register_profile("ellcov", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ellcov")

BRANCH_POINTS = (0.1 + 0.2j, 1.3 - 0.1j, 2.2 + 0.9j, 0.4 + 1.7j)
MUS = (1j, 2j, 1 / 3 + 2j)


@pytest.fixture(scope="session")
def bp():
    return BRANCH_POINTS


@pytest.fixture(scope="session")
def cov():
    return two_sheet_covering(*BRANCH_POINTS)


@pytest.fixture(scope="session")
def coupled2(cov):
    return seeded_coupled_state(cov, 2, 2, seed=11)


@pytest.fixture(scope="session")
def coupled3(cov):
    return seeded_coupled_state(cov, 3, 2, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(results):
        terminalreporter.write_line(results[label][1])
