import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from inoue_spectrum import cappell_shaneson, eigen_data, lattice_basis  # noqa: E402

CS_RANGE = range(-2, 4)


@pytest.fixture(scope="session")
def surfaces():
    """(M, E, B) for every Cappell-Shaneson matrix A_m, keyed by m."""
    out = {}
    for m in CS_RANGE:
        M = cappell_shaneson(m)
        E = eigen_data(M)
        out[m] = (M, E, lattice_basis(E))
    return out


@pytest.fixture(scope="session")
def a0(surfaces):
    return surfaces[0]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
