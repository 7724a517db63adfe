import sys

import numpy as np
import pytest

from dftatoms import numerics as nm, thomasfermi as tf


@pytest.fixture(scope="session")
def grid():
    return nm.default_grid()


@pytest.fixture(scope="session")
def tf_solutions(grid):
    return {Z: tf.solve_tf_neutral(Z, grid) for Z in (1.0, 10.0)}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    RESULTS = getattr(mod, "RESULTS", None)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
