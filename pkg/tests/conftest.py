from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from proca_lab.mesh import build_complex, build_mesh
from proca_lab.spacetime import ultrastatic_grid

settings.register_profile(
    "lab",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("lab")

# criterion number -> (description, passed); filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[str, bool]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        text, ok = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}")


def variable_table(n: int, seed: int = 7) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.5, 2.0, n)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def flat_circle4():
    return build_complex(build_mesh(1, [4], 1.0))


@pytest.fixture(scope="session")
def flat_circle8():
    return build_complex(build_mesh(1, [8], 1.0))


@pytest.fixture(scope="session")
def variable_circle8():
    return build_complex(build_mesh(1, [8], 0.5, variable_table(8)))


@pytest.fixture(scope="session")
def variable_torus4():
    return build_complex(build_mesh(2, [4, 4], 1.0, variable_table(32, 3)))


@pytest.fixture(scope="session")
def small_grid():
    """Flat 1+1 grid, 8 nodes by 24 levels."""
    return ultrastatic_grid(build_mesh(1, [8], 1.0), 24, 0.25)


def margined(grid, rng, extra: int = 1) -> np.ndarray:
    mask = grid.margined_mask(grid.margin + extra)
    return rng.standard_normal(grid.n_dofs) * mask
