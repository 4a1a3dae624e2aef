from __future__ import annotations

import numpy as np
import pytest

from beta_chains.config import reset_tolerances
from beta_chains.stats import make_rng


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(12345)


@pytest.fixture(autouse=True)
def _fresh_tolerances():
    reset_tolerances()
    yield
    reset_tolerances()


_ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one summary line per acceptance criterion."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
