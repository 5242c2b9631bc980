import numpy as np
import pytest

from mbhalf.core import GridSpec, ProblemData

# one shared geometry for the linear scenarios: boundary-quiescent data stays
# well inside [0, L] over [0, T]
LINEAR_GRID = GridSpec(L=20, nx=401, T=0.2, nt=101, R=10, nq=1600)
NONLINEAR_GRID = GridSpec(L=20, nx=401, T=0.1, nt=21, R=10, nq=1600)


@pytest.fixture(scope="session")
def linear_grid():
    return LINEAR_GRID


@pytest.fixture(scope="session")
def nonlinear_grid():
    return NONLINEAR_GRID


@pytest.fixture(scope="session")
def small_data():
    return ProblemData.from_profiles(NONLINEAR_GRID, u0="gaussian(center=8,width=1,amp=0.5)",
                                     v0="gaussian(center=9,width=1,amp=0.5)")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance bookkeeping: one summary line per criterion at the end of the run
ACCEPTANCE = {}


def record(criterion, ok, detail):
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        ok = all(p[0] for p in parts)
        detail = "; ".join(("" if p[0] else "FAILED ") + p[1] for p in parts)
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
