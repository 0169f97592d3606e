import math

import pytest

from trapnoise.physical import COPPER, ThermalEnvironment, skin_depth

MHZ = 2 * math.pi * 1e6


def loglog_slope(f, x, step=1.02):
    """Centred finite-difference d ln f / d ln x."""
    return math.log(f(x * step) / f(x / step)) / (2 * math.log(step))


@pytest.fixture
def room():
    return ThermalEnvironment(300.0)


@pytest.fixture
def copper_delta_1mhz():
    return skin_depth(COPPER, MHZ)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
