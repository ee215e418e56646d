import shutil

import pytest

from tstts.benchmarks import timer
from tstts.model import prepare
from tstts.smt import SolverConfig, default_command


def pytest_collection_modifyitems(config, items):
    if shutil.which(default_command()[0]) is None:
        skip = pytest.mark.skip(reason="no SMT solver on PATH")
        for item in items:
            if "solver" in item.fixturenames or "timer_sys" in item.fixturenames:
                item.add_marker(skip)


@pytest.fixture(scope="session")
def solver():
    return SolverConfig()


@pytest.fixture(scope="session")
def timer_sys(solver):
    return prepare(timer(), solver)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance")
        for line in RESULTS:
            terminalreporter.write_line(line)
