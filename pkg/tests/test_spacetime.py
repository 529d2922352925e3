from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import margined
from proca_lab.mesh import build_mesh
from proca_lab.spacetime import (
    adjoint,
    assemble_kg,
    assemble_proca,
    assemble_q,
    build_grid,
    chi_values,
    fiber_isometry,
    lorentz_pairing,
    smoothstep,
    ultrastatic_grid,
    volume_ratio,
)


def test_smoothstep_endpoints():
    np.testing.assert_allclose(smoothstep(np.array([-1.0, 0.0, 0.5, 1.0, 2.0])), [0, 0, 0.5, 1, 1])


def test_chi_profiles():
    t = np.linspace(0, 4, 5)
    np.testing.assert_array_equal(chi_values("zero", t, (1, 3)), 0)
    np.testing.assert_array_equal(chi_values("one", t, (1, 3)), 1)
    np.testing.assert_allclose(chi_values("smoothstep", t, (1, 3)), [0, 0, 0.5, 1, 1])
    with pytest.raises(ValueError):
        chi_values("cosine", t, (1, 3))


def test_layout(small_grid):
    g = small_grid
    assert g.n_positions == 2 * 24 - 1
    assert g.n_dofs == 24 * 8 + 23 * 8
    assert g.dof_position[g.a1_slice(3)].tolist() == [6] * 8
    assert g.dof_position[g.a0_slice(3)].tolist() == [7] * 8


def test_dt_bound_rejected():
    mesh = build_mesh(1, [8], 1.0, 0.25)
    with pytest.raises(ValueError, match="stability"):
        ultrastatic_grid(mesh, 16, 0.6)


def test_leapfrog_bound_rejected():
    mesh = build_mesh(1, [8], 1.0)
    with pytest.raises(ValueError, match="leapfrog"):
        ultrastatic_grid(mesh, 16, 0.9, mass_sq=25.0)


def test_chi_must_be_static_on_margins():
    m0 = build_mesh(1, [8], 1.0)
    m1 = build_mesh(1, [8], 1.0, 1.5)
    with pytest.raises(ValueError, match="past margin"):
        build_grid(m0, m1, "smoothstep", 24, 0.25, 3, window=(0.0, 5.0))
    with pytest.raises(ValueError, match="future margin"):
        build_grid(m0, m1, "smoothstep", 24, 0.25, 3, window=(1.5, 5.75))


def test_interpolated_metric_levels():
    m0 = build_mesh(1, [8], 1.0)
    m1 = build_mesh(1, [8], 1.0, 1.5)
    g = build_grid(m0, m1, "smoothstep", 32, 0.25, 4)
    np.testing.assert_array_equal(g.metric_slices[0], 1.0)
    np.testing.assert_array_equal(g.metric_slices[-1], 1.5)
    assert np.all(np.diff(g.metric_slices[:, 0]) >= 0)


def test_pairing_signs(small_grid):
    g = small_grid
    e = np.zeros(g.n_dofs)
    e[g.a1_slice(5).start] = 1.0
    assert lorentz_pairing(g, e, e) == pytest.approx(g.dt)
    e0 = np.zeros(g.n_dofs)
    e0[g.a0_slice(5).start] = 1.0
    assert lorentz_pairing(g, e0, e0) == pytest.approx(-1.0 / g.dt)


def test_pairing_rejects_shared_boundary(small_grid):
    f = np.ones(small_grid.n_dofs)
    with pytest.raises(ValueError):
        lorentz_pairing(small_grid, f, f)


def test_kappa_scale():
    g_a = ultrastatic_grid(build_mesh(1, [8], 1.0, 1.0), 16, 0.25)
    g_b = ultrastatic_grid(build_mesh(1, [8], 1.0, 4.0), 16, 0.25)
    k = fiber_isometry(g_a, g_b).matrix.diagonal()
    np.testing.assert_allclose(k[g_a.a1_slice(3)], 2.0)
    np.testing.assert_allclose(k[g_a.a0_slice(3)], 1.0)


def test_volume_ratio_for_circle():
    g_a = ultrastatic_grid(build_mesh(1, [8], 1.0, 1.0), 16, 0.25)
    g_b = ultrastatic_grid(build_mesh(1, [8], 1.0, 1.5), 16, 0.25)
    np.testing.assert_allclose(volume_ratio(g_a, g_b), np.sqrt(1.5))


@pytest.fixture(scope="module")
def varying_grid():
    m0 = build_mesh(2, [3, 3], 1.0, np.random.default_rng(5).uniform(0.8, 1.6, 18))
    m1 = build_mesh(2, [3, 3], 1.0, np.random.default_rng(6).uniform(0.8, 1.6, 18))
    return build_grid(m0, m1, "smoothstep", 16, 0.25, 2, mass_sq=0.7, window=(0.75, 3.0))


@given(seed=st.integers(0, 2**16))
def test_operator_factorization(seed, varying_grid):
    g = varying_grid
    N, P, Q = (h.matrix for h in (assemble_kg(g), assemble_proca(g), assemble_q(g)))
    f = np.random.default_rng(seed).standard_normal(g.n_dofs)
    scale = np.linalg.norm(N @ f)
    assert np.linalg.norm(P @ (Q @ f) - N @ f) <= 1e-12 * scale
    assert np.linalg.norm(Q @ (P @ f) - N @ f) <= 1e-12 * scale
    assert np.linalg.norm(N @ (P @ f) - P @ (N @ f)) <= 1e-12 * np.linalg.norm(N @ (P @ f))


@given(seed=st.integers(0, 2**16))
def test_operators_are_pairing_symmetric(seed, varying_grid):
    g = varying_grid
    rng = np.random.default_rng(seed)
    f, h = margined(g, rng, 0), margined(g, rng, 0)
    for op in (assemble_kg(g), assemble_proca(g), assemble_q(g)):
        a = lorentz_pairing(g, f, op @ h)
        b = lorentz_pairing(g, op @ f, h)
        assert abs(a - b) <= 1e-12 * max(abs(a), 1.0)


def test_adjoint_of_symmetric_operator_is_itself(varying_grid):
    P = assemble_proca(varying_grid)
    diff = adjoint(P).matrix - P.matrix
    assert abs(diff).max() <= 1e-12 * abs(P.matrix).max()


@given(steps=st.integers(-3, 3), seed=st.integers(0, 2**10))
def test_time_shift_commutes_with_static_operator(steps, seed, small_grid):
    g = small_grid
    f = margined(g, np.random.default_rng(seed), 4)
    P = assemble_proca(g)
    lhs = P @ g.time_shift(f, steps)
    rhs = g.time_shift(P @ f, steps)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)
