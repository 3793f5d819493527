import pytest
from hypothesis import HealthCheck, settings

from rtrx.analysis import FrequencyGrid

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid():
    return FrequencyGrid(20.0, 20000.0, 500)


@pytest.fixture(scope="session")
def small_grid():
    return FrequencyGrid(20.0, 20000.0, 120)


# Acceptance criteria record one line each here; printed at the end of the run.
ACCEPTANCE_LINES: list[tuple[int, str]] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
