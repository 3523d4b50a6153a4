import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from perimeter_defense.engagement import Branch, GameParams, solve_critical_radius  # noqa: E402
from perimeter_defense.game import GameEngine  # noqa: E402
from perimeter_defense.reachability import game_grid  # noqa: E402

BASELINE = dict(r_T=10.0, rho_T=20.0, rho_A=3.0, nu=0.8, omega_D=0.5, omega_A=1.5)


@pytest.fixture(scope="session")
def params():
    return GameParams(**BASELINE)


@pytest.fixture(scope="session")
def grid(params):
    return game_grid(params.r_T, params.rho_T)


@pytest.fixture(scope="session")
def sol(params, grid):
    return solve_critical_radius(params, grid)


@pytest.fixture(scope="session")
def engine(params, grid, sol):
    eng = GameEngine(params, grid, sol, record_trajectories=False)
    eng.canonical_capture(Branch.CCW)
    eng.canonical_capture(Branch.CW)
    return eng


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
