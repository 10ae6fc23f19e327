import numpy as np
import pytest

from multitrace.linalg import random_density_matrix
from multitrace.rng import RngStream

# filled by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def np_rng():
    return np.random.default_rng(2024)


def random_states(rng, m, p=1, rank=None):
    d = 2**p
    return [random_density_matrix(d, rank or d, rng) for _ in range(m)]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
