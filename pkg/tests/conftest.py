import math

import numpy as np
import pytest

from homodyne_bell import engine, optimizer, states

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[ACCEPTANCE_KEY]


@pytest.fixture(scope="session")
def table10():
    return engine.build_coupling_table(10)


@pytest.fixture(scope="session")
def table30():
    return engine.build_coupling_table(30)


@pytest.fixture(scope="session")
def circle112():
    return states.circle_state(1.12, 10)


@pytest.fixture(scope="session")
def bell_pair():
    return states.two_pair_state(1.0 / math.sqrt(2.0))


@pytest.fixture(scope="session")
def random_states():
    """20 seeded random real states with truncation 10."""
    rng = np.random.default_rng(20240607)
    return [states.from_coefficients(rng.normal(size=11)) for _ in range(20)]


@pytest.fixture(scope="session")
def random_angles():
    rng = np.random.default_rng(7)
    return rng.uniform(-2 * math.pi, 2 * math.pi, size=20)


@pytest.fixture(scope="session")
def ch_report():
    return optimizer.optimize_coefficients("ch", 10, optimizer.OptimizerConfig(seed=42))


@pytest.fixture(scope="session")
def spin_report():
    return optimizer.optimize_coefficients("spin", 10, optimizer.OptimizerConfig(seed=42))
