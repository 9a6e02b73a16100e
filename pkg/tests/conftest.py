import numpy as np
import pytest

from weldlab.diffeo import REFERENCE_SPEC, invert, make_diffeo
from weldlab.welding import invert_pair, weld


@pytest.fixture(scope="session")
def gamma_star():
    """Reference input s = 0.1 sin 2 theta - 0.06 sin 3 theta on M = 1024."""
    return make_diffeo(REFERENCE_SPEC, 1024)


@pytest.fixture(scope="session")
def gamma_star_inv(gamma_star):
    return invert(gamma_star)


@pytest.fixture(scope="session")
def pair_star(gamma_star):
    return weld(gamma_star, 256)


@pytest.fixture(scope="session")
def pair_star_inv(pair_star):
    return invert_pair(pair_star)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
