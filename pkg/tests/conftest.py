import numpy as np
import pytest

from nonholo.config import load_config
from nonholo.controllability import HamiltonianPair
from nonholo.linalg import random_hermitian


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_pair(rng):
    return HamiltonianPair(random_hermitian(4, rng), random_hermitian(4, rng))


@pytest.fixture(scope="session")
def default_config():
    return load_config()


@pytest.fixture(scope="session")
def rydberg_pair(default_config):
    return default_config.pair


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
