import numpy as np
import pytest
from hypothesis import settings

from leafwise.grid import ScalarField, TorusGrid

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def line64():
    return TorusGrid.uniform(64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def const(grid, c):
    return ScalarField.constant(grid, c)


def const_fields(grid, beta, psi1, psi2, psi3):
    return tuple(ScalarField.constant(grid, v) for v in (beta, psi1, psi2, psi3))


def random_trig(grid, rng, modes=3, amp=1.0, offset=0.0):
    """Random low-order trigonometric polynomial on a 1-D or 2-D torus."""
    s = np.full(grid.shape, float(offset))
    for ax, x in enumerate(grid.coords()):
        L = grid.periods[ax]
        for k in range(1, modes + 1):
            a, b = rng.uniform(-amp, amp, 2) / k
            s = s + a * np.cos(2 * np.pi * k * x / L) + b * np.sin(2 * np.pi * k * x / L)
    return ScalarField(grid, s.reshape(-1))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
