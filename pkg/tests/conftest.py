import math

import numpy as np
import pytest

from pathinv.grid import GridSpec

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(16, 16, 32)


@pytest.fixture(scope="session")
def corpus_grid():
    # resolves bandwidth 5 on every axis: (48 - 16) // 4 = 8
    return GridSpec(48, 48, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
