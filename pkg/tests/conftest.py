import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nsac.core import Grid, Params

settings.register_profile("nsac", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("nsac")


@pytest.fixture
def grid256():
    return Grid(256)


@pytest.fixture
def params():
    return Params()


def trig_poly(grid, coeffs_sin, coeffs_cos):
    """sum a_k sin(k pi x) + b_k cos(k pi x), k starting at 1 (sin) and 0 (cos)."""
    x = grid.nodes
    out = np.zeros_like(x)
    for k, a in enumerate(coeffs_sin, start=1):
        out += a * np.sin(k * np.pi * x)
    for k, b in enumerate(coeffs_cos):
        out += b * np.cos(k * np.pi * x)
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num])
