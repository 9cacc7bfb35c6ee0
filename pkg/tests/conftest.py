import numpy as np
import pytest

from ndcstar import samples

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def systems():
    return samples.sample_systems(0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

