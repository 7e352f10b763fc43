import numpy as np
import pytest

from folrho import tolerances


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture(autouse=True)
def _reset_scale():
    yield
    tolerances.set_scale(1.0)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
