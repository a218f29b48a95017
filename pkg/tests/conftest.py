import numpy as np
import pytest

from ftcalib.model import Dataset
from ftcalib.synth import make_sensor, reference_scenario

ACCEPTANCE_RESULTS = []


def make_dataset(raw, reference, temperature=None, kind="custom", name="test", time=None):
    raw = np.asarray(raw, dtype=float)
    n = raw.shape[0]
    if temperature is None:
        temperature = np.full(n, 35.0)
    if time is None:
        time = np.arange(n, dtype=float)
    return Dataset(time, raw, np.broadcast_to(temperature, (n,)), reference, kind=kind, name=name)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def sensor():
    return make_sensor(0)


@pytest.fixture(scope="session")
def scenario(sensor):
    return reference_scenario(seed=0, sensor=sensor)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
