import numpy as np
import pytest

from hodowave.solver import PhysicalParams, continuation_path, solve_wave

DEPTH_RATIOS = (0.1, 0.2, 0.5)
HEIGHT_RATIOS = (0.0, 0.01, 0.03, 0.05)
L = 100.0


@pytest.fixture(scope="session")
def w1():
    return solve_wave(PhysicalParams(100.0, 10.0, 5.0))


@pytest.fixture(scope="session")
def flat():
    return solve_wave(PhysicalParams(100.0, 10.0, 0.0))


@pytest.fixture(scope="session")
def wave_set():
    """Twelve waves: d/L in DEPTH_RATIOS times H/L in HEIGHT_RATIOS."""
    waves = []
    for dr in DEPTH_RATIOS:
        heights = [hr * L for hr in HEIGHT_RATIOS]
        waves += continuation_path(PhysicalParams(L, dr * L, heights[-1]), heights)
    return waves


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20261018)


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
