from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import margined
from proca_lab.green import GreenSolver, cone_leakage, kg_green, proca_green
from proca_lab.mesh import build_mesh
from proca_lab.spacetime import assemble_proca, assemble_q, build_grid, lorentz_pairing, ultrastatic_grid


def leapfrog(levels: int, dt: float, op: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Independent oracle: u(n+1) = 2u(n) - u(n-1) + dt²(f(n) - op u(n)), quiet start."""
    u = np.zeros((levels, op.shape[0]))
    for n in range(1, levels - 1):
        u[n + 1] = 2 * u[n] - u[n - 1] + dt * dt * (source[n] - op @ u[n])
    return u


@pytest.mark.parametrize("h", [1.0, 1.7])
def test_retarded_kg_matches_leapfrog_for_vector_part(h):
    g = ultrastatic_grid(build_mesh(1, [8], 1.0, h), 24, 0.25)
    f = np.zeros(g.n_dofs)
    rng = np.random.default_rng(0)
    for n in (6, 7, 8):
        f[g.a1_slice(n)] = rng.standard_normal(8)
    u = kg_green(g).plus(f)
    cx = g.level_complexes[0]
    oracle = leapfrog(24, g.dt, cx.lap1.toarray() + np.eye(8), np.array([f[g.a1_slice(n)] for n in range(24)]))
    got = np.array([u[g.a1_slice(n)] for n in range(24)])
    np.testing.assert_allclose(got, oracle, atol=1e-14)
    assert not any(np.any(u[g.a0_slice(n)]) for n in range(23))


def test_retarded_kg_matches_leapfrog_for_scalar_part():
    g = ultrastatic_grid(build_mesh(1, [8], 1.0, 1.7), 24, 0.25)
    f = np.zeros(g.n_dofs)
    rng = np.random.default_rng(1)
    for n in (6, 7, 8):
        f[g.a0_slice(n)] = rng.standard_normal(8)
    u = kg_green(g).plus(f)
    cx = g.half_complexes[0]
    oracle = leapfrog(23, g.dt, cx.lap0.toarray() + np.eye(8), np.array([f[g.a0_slice(n)] for n in range(23)]))
    got = np.array([u[g.a0_slice(n)] for n in range(23)])
    np.testing.assert_allclose(got, oracle, atol=1e-14)


def test_unknown_direction_and_kind(small_grid):
    with pytest.raises(ValueError):
        GreenSolver(assemble_proca(small_grid), "sideways")
    with pytest.raises(ValueError):
        GreenSolver(assemble_q(small_grid), "retarded")


def test_margin_violation_raises(small_grid):
    f = np.zeros(small_grid.n_dofs)
    f[0] = 1.0
    with pytest.raises(ValueError):
        proca_green(small_grid).plus(f)
    with pytest.raises(ValueError):
        proca_green(small_grid).propagate(f)


@pytest.fixture(scope="module")
def bumpy():
    m0 = build_mesh(1, [8], 1.0)
    m1 = build_mesh(1, [8], 1.0, np.random.default_rng(2).uniform(1.0, 1.6, 8))
    return build_grid(m0, m1, "smoothstep", 24, 0.25, 3, window=(1.0, 4.5))


@pytest.fixture(scope="module")
def bumpy_pairs(bumpy):
    return proca_green(bumpy), kg_green(bumpy)


@given(seed=st.integers(0, 2**16))
def test_fast_and_dense_paths_agree(seed, bumpy, bumpy_pairs):
    f = margined(bumpy, np.random.default_rng(seed))
    for pair in bumpy_pairs:
        for solver in (pair.plus, pair.minus):
            fast, dense = solver.solve(f), solver.dense_solve(f)
            assert np.linalg.norm(fast - dense) <= 1e-11 * np.linalg.norm(dense)


@given(seed=st.integers(0, 2**16))
def test_green_inverts_operator(seed, bumpy, bumpy_pairs):
    # dropped rows at the temporal ends are not imposed, so compare on the interior band
    f = margined(bumpy, np.random.default_rng(seed))
    band = bumpy.interior_mask
    for pair in bumpy_pairs:
        for solver in (pair.plus, pair.minus):
            u = solver.solve(f)
            assert np.linalg.norm((pair.operator @ u - f)[band]) <= 1e-11 * np.linalg.norm(f)
        assert np.linalg.norm((pair.operator @ pair.propagate(f))[band]) <= 1e-11 * np.linalg.norm(f)


@given(seed=st.integers(0, 2**16))
def test_retarded_and_advanced_are_adjoint(seed, bumpy, bumpy_pairs):
    rng = np.random.default_rng(seed)
    f, h = margined(bumpy, rng), margined(bumpy, rng)
    for pair in bumpy_pairs:
        a = lorentz_pairing(bumpy, f, pair.plus(h), check=False)
        b = lorentz_pairing(bumpy, pair.minus(f), h, check=False)
        assert abs(a - b) <= 1e-11 * max(abs(a), 1.0)


@given(seed=st.integers(0, 2**16))
def test_propagator_is_antisymmetric(seed, bumpy, bumpy_pairs):
    rng = np.random.default_rng(seed)
    f, h = margined(bumpy, rng), margined(bumpy, rng)
    pair = bumpy_pairs[0]
    a = lorentz_pairing(bumpy, f, pair(h), check=False)
    b = lorentz_pairing(bumpy, pair(f), h, check=False)
    assert abs(a + b) <= 1e-11 * max(abs(a), 1.0)


@given(level=st.integers(8, 14), node=st.integers(0, 7))
def test_impulse_stays_inside_lattice_cone(level, node, small_grid):
    f = np.zeros(small_grid.n_dofs)
    f[small_grid.a1_slice(level).start + node] = 1.0
    pair = proca_green(small_grid)
    u = pair.plus(f)
    assert np.abs(u).max() > 0
    assert cone_leakage(small_grid, u, level, node, "retarded") == 0.0
    assert cone_leakage(small_grid, pair.minus(f), level, node, "advanced") == 0.0


def test_retarded_vanishes_before_source(small_grid):
    f = np.zeros(small_grid.n_dofs)
    f[small_grid.a1_slice(10)] = 1.0
    u = proca_green(small_grid).plus(f)
    assert not np.any(u[small_grid.dof_position < 20])
