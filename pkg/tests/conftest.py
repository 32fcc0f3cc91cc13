import numpy as np
import pytest

from deltasing.catalog import full_catalog
from deltasing.mechanism import ParameterSet, build_delta

MAIN = (3.0, 5.0, 0.5)
SECOND = (2.0, 3.0, 0.25)


@pytest.fixture(scope="session")
def params():
    return ParameterSet(*MAIN)


@pytest.fixture(scope="session")
def params2():
    return ParameterSet(*SECOND)


@pytest.fixture(scope="session")
def delta(params):
    return build_delta(params)


@pytest.fixture(scope="session")
def catalog(params):
    return full_catalog(params)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
