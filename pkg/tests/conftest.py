import numpy as np
import pytest

from mgrit_nn.network import XOR_TOPOLOGY, xor_dataset
from mgrit_nn.schedules import TrainingPolicy

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line("%s  %2d. %-28s %s" % (
            "PASS" if passed else "FAIL", number, name, detail))


@pytest.fixture
def record():
    def _record(number, name, passed, detail=""):
        ACCEPTANCE.append((number, name, bool(passed), detail))
    return _record


@pytest.fixture
def xor():
    return xor_dataset()


@pytest.fixture
def xor_batch_policy(xor):
    return TrainingPolicy("batch", xor)


@pytest.fixture
def topo():
    return XOR_TOPOLOGY


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
