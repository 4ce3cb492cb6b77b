from __future__ import annotations

import glob
import os

import pytest

from hybrid_testgen.frontend import parse
from hybrid_testgen.instrument import inject_goals

HERE = os.path.dirname(os.path.abspath(__file__))
CORPUS = os.path.join(os.path.dirname(HERE), "src", "hybrid_testgen", "corpus")


def corpus_files(sub: str = "") -> list:
    return sorted(glob.glob(os.path.join(CORPUS, sub, "*.c")))


def read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture(scope="session")
def quadratic_source() -> str:
    return read(os.path.join(CORPUS, "quadratic.c"))


@pytest.fixture(scope="session")
def quadratic_golden() -> str:
    return read(os.path.join(HERE, "data", "quadratic_instrumented.c"))


@pytest.fixture()
def quadratic(quadratic_source):
    """Fresh (instrumented program, goals tree) pair for the worked example."""
    return inject_goals(parse(quadratic_source))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
