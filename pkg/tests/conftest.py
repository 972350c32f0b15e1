import numpy as np
import pytest

from mvdual import polytope

# criterion id -> (passed, detail); printed once at the end of the session
CRITERIA = {}


def record(criterion, passed, detail):
    CRITERIA[criterion] = (bool(passed), detail)
    print(f"[criterion {criterion}] {'PASS' if passed else 'FAIL'}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA):
        passed, detail = CRITERIA[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


def random_interior_simplex(rng, r, scale=1.0):
    """(r-1) x r simplex whose vertices average to the origin."""
    while True:
        dual = scale * rng.standard_normal((r - 1, r))
        dual -= dual.mean(axis=1, keepdims=True)
        if polytope.simplex_volume(dual) > 1e-3 * scale ** (r - 1):
            return dual


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
