"""Shared fixtures.

The thread environment must be pinned before the compiled kernels are
first imported, so this module sets it at import time (conftest loads
before any test module).  The two steady-state runs are session-scoped:
several test files and most acceptance criteria share them.
"""

import os

os.environ.setdefault("NUMBA_NUM_THREADS", "4")
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import pytest

from tfpl.core_types import (
    IDENTITY_TEMPERING,
    InitialData,
    OperatorParams,
    ReactionTerm,
    SimulationConfig,
)

# reference problem used across the diagnostics and acceptance suites:
# logistic reaction on the unit disk, mildly tempered kernel
BASE_PARAMS = OperatorParams(n=2, s=0.5, p=2.5, lam=0.1, c_norm=1.0,
                             f=IDENTITY_TEMPERING)


def steady_config(M: int, t_end: float = 60.0) -> SimulationConfig:
    return SimulationConfig(
        params=BASE_PARAMS,
        reaction=ReactionTerm("logistic"),
        field_kind="radial",
        h=1.0 / M,
        initial=InitialData("barrier", amplitude=0.5),
        t_end=t_end,
        tol_steady=1e-6,
    )


@pytest.fixture(scope="session")
def radial_steady_64():
    """(trajectory, steady profile) of the reference run at M = 64."""
    from tfpl import solver
    return solver.run(steady_config(64))


@pytest.fixture(scope="session")
def radial_steady_96():
    """(trajectory, steady profile) of the reference run at M = 96."""
    from tfpl import solver
    return solver.run(steady_config(96))


# one verdict line per acceptance criterion, emitted after the test
# summary (the terminal reporter is never captured, unlike stdout)
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
