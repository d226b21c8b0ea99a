import sys
from pathlib import Path

import numpy as np
import pytest

import ammd

sys.path.insert(0, str(Path(__file__).parent))

# criterion id -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE = {}


@pytest.fixture(params=ammd.available_backends())
def backend(request):
    prev = ammd.use_backend(request.param)
    yield request.param
    ammd.use_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def right_angle(n=3, dims=45):
    X = np.zeros((4, dims))
    X[:, :2] = [(0, 0), (1, 0), (1, 1), (1, 2)]
    return X[:n]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{status}] {cid}: {detail}")
