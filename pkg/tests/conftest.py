from fractions import Fraction

import pytest

from ratsphere.polynomials import HarmonicPoly


@pytest.fixture
def p4():
    """x^4 - 6x^2y^2 + y^4, the real part of (x + iy)^4."""
    return HarmonicPoly({(4, 0, 0): Fraction(1), (2, 2, 0): Fraction(-6), (0, 4, 0): Fraction(1)})


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
