import pytest
from hypothesis import HealthCheck, settings

from capvertex.exactalg import Env

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by the acceptance tests, printed at the end of the session
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def sym1():
    return Env.symbolic(1)


@pytest.fixture(scope="session")
def spec1():
    return Env.specialized(5, 1)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
