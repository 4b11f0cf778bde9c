import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dnls.grid import FrequencyGrid

settings.register_profile("dnls", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dnls")


@pytest.fixture
def grid1():
    return FrequencyGrid(1, 128, 16.0)


@pytest.fixture
def grid2():
    return FrequencyGrid(2, 32, 8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rel(a, b):
    """Relative max-norm gap between two arrays."""
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
