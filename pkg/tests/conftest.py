import numpy as np
import pytest

from eemimo import PowerModel, generate_channels

# acceptance lines collected by test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture
def model():
    return PowerModel()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_channel():
    return generate_channels(3, M=4, N=2, K=2, distance_km=1.0)


def random_psd(rng, n, scale=1.0, rank=None):
    r = n if rank is None else rank
    B = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    return scale * (B @ B.conj().T)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section('acceptance criteria')
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
