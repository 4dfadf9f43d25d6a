from pathlib import Path

import numpy as np
import pytest

from dualkernel import _accel

ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = ROOT / "data" / "fashion-mnist"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(_accel.implementations()))
def impl(request):
    """Each available hot-kernel implementation (compiled and/or pure Python)."""
    return _accel.implementations()[request.param]


@pytest.fixture(scope="session")
def data_dir():
    if not DATA_DIR.exists():
        pytest.skip("bundled Fashion-MNIST subset not found")
    return DATA_DIR


ACCEPTANCE = {}


@pytest.fixture
def verdict(request):
    """Record an acceptance criterion's outcome for the end-of-run summary."""
    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
        assert passed, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
