import numpy as np
import pytest

from concatgmd.finite_field import get_field
from concatgmd.outer_code import RSCode


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def rs73():
    return RSCode(get_field(3), 7, 3)


@pytest.fixture(scope="session")
def rs159():
    return RSCode(get_field(4), 15, 9)


@pytest.fixture(scope="session")
def rs73_codebook(rs73):
    return np.array(list(rs73.codewords()))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
