from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import margined
from proca_lab.cauchy import make_constrained
from proca_lab.mesh import build_mesh
from proca_lab.spacetime import assemble_proca, build_grid, lorentz_pairing, ultrastatic_grid
from proca_lab.states import (
    QuasifreeState,
    TwoPointReport,
    combinations_count,
    fp_equivalence,
    kg_covariance,
    localize,
    mu_form,
    perfect_matchings,
    sigma_slice_route,
    single_mode_section,
    time_cutoff,
    two_point,
    two_point_gram,
    two_point_value,
    wick_n_point,
)


@pytest.fixture(scope="module")
def state():
    grid = ultrastatic_grid(build_mesh(1, [8], 1.0), 24, 0.25, mass_sq=1.0)
    return QuasifreeState(grid)


def test_report_consistency_guard():
    with pytest.raises(ValueError):
        TwoPointReport(1.0 + 0.0j, 1.0, 2.0, "bad")


def test_rejects_time_dependent_grid():
    m0 = build_mesh(1, [8], 1.0)
    m1 = build_mesh(1, [8], 1.0, 1.5)
    grid = build_grid(m0, m1, "smoothstep", 24, 0.25, 3, window=(1.0, 4.5))
    with pytest.raises(ValueError):
        QuasifreeState(grid)


def test_mode_covariance_is_inverse_twice_frequency(state):
    # ground-state variance of a normalized mode: ⟨π π⟩ = ω/2 paired with ⟨a a⟩ = 1/(2ω)
    spec = state.spectra.spec0
    for k, lam in enumerate(spec.eigenvalues):
        e = spec.eigenvectors[:, k]
        omega = np.sqrt(lam + spec.mass_sq)
        z = np.zeros_like(e)
        assert state.sector_covariance(0, z, e, z, e).real == pytest.approx(1 / (2 * omega), rel=1e-12)
        assert state.sector_covariance(0, e, z, e, z).real == pytest.approx(omega / 2, rel=1e-12)


def test_kg_covariance_split(state, rng):
    n = state.complex.n_cells(1)
    A = (rng.standard_normal(n), rng.standard_normal(n))
    B = (rng.standard_normal(n), rng.standard_normal(n))
    diff = kg_covariance(state, "+", 1, A, B) - kg_covariance(state, "-", 1, A, B)
    cx = state.complex
    sigma = np.dot(A[0], cx.W1 * B[1]) - np.dot(B[0], cx.W1 * A[1])
    assert diff == pytest.approx(1j * sigma, abs=1e-12)
    with pytest.raises(ValueError):
        kg_covariance(state, "0", 1, A, B)


@given(seed=st.integers(0, 2**16))
def test_mu_is_positive_on_admissible_data(seed, state):
    rng = np.random.default_rng(seed)
    d = make_constrained(state.complex, 1.0, rng.standard_normal(8), None, rng.standard_normal(8))
    assert mu_form(state, d, d) > 0


def test_mu_refuses_inadmissible(state):
    from proca_lab.cauchy import cauchy_data

    bad = cauchy_data(state.complex, 1.0, np.ones(8), np.zeros(8), np.zeros(8), np.zeros(8))
    with pytest.raises(ValueError):
        mu_form(state, bad, bad)


@given(seed=st.integers(0, 2**16))
def test_two_point_antisymmetric_part_is_propagator(seed, state):
    rng = np.random.default_rng(seed)
    f, h = margined(state.grid, rng), margined(state.grid, rng)
    w_fh, w_hf = two_point_value(state, f, h), two_point_value(state, h, f)
    scale = max(abs(w_fh), 1.0)
    Gh = state.green(h)
    assert abs((w_fh - w_hf) - 1j * lorentz_pairing(state.grid, f, Gh, check=False)) <= 1e-11 * scale
    assert abs(w_fh.real - w_hf.real) <= 1e-11 * scale


@given(seed=st.integers(0, 2**16))
def test_sigma_routes_agree(seed, state):
    rng = np.random.default_rng(seed)
    f, h = margined(state.grid, rng), margined(state.grid, rng)
    rep = two_point(state, f, h)
    assert abs(rep.sigma - sigma_slice_route(state, f, h)) <= 1e-11 * max(abs(rep.sigma), 1.0)


@given(seed=st.integers(0, 2**16))
def test_two_point_vanishes_on_operator_image(seed, state):
    rng = np.random.default_rng(seed)
    g = margined(state.grid, rng, 3)
    f = margined(state.grid, rng)
    Pg = assemble_proca(state.grid) @ g
    assert abs(two_point_value(state, Pg, f)) <= 1e-10 * np.linalg.norm(g) * np.linalg.norm(f)


def test_gram_is_positive_semidefinite(state):
    rng = np.random.default_rng(11)
    sections = [margined(state.grid, rng) for _ in range(6)]
    M = two_point_gram(state, sections)
    assert np.abs(M - M.conj().T).max() <= 1e-11 * np.abs(M).max()
    assert np.linalg.eigvalsh(M).min() >= -1e-10 * np.abs(M).max()


@given(seed=st.integers(0, 2**8))
def test_fp_equivalence(seed, state):
    rng = np.random.default_rng(seed)
    f, h = margined(state.grid, rng), margined(state.grid, rng)
    scale = max(abs(two_point_value(state, f, h)), 1.0)
    assert fp_equivalence(state, f, h) <= 1e-10 * scale


def test_matchings_count():
    assert [len(perfect_matchings(range(n))) for n in (0, 2, 4, 6)] == [1, 1, 3, 15]
    assert [combinations_count(n) for n in (0, 2, 4, 6, 8, 3)] == [1, 1, 3, 15, 105, 0]
    assert perfect_matchings([0, 1, 2]) == []


def test_wick_four_point_is_three_pairings():
    table = np.array([[1, 2 + 1j, 3, 4], [5, 1, 6j, 7], [8, 9, 1, 10 - 2j], [11, 12, 13, 1]], dtype=complex)
    omega = lambda f, g: table[int(f[0]), int(g[0])]  # noqa: E731
    secs = [np.array([i]) for i in range(4)]
    expected = table[0, 1] * table[2, 3] + table[0, 2] * table[1, 3] + table[0, 3] * table[1, 2]
    assert wick_n_point(omega, secs) == expected
    assert wick_n_point(omega, secs[:3]) == 0


def test_wick_with_state(state, rng):
    secs = [margined(state.grid, rng) for _ in range(4)]
    w = lambda a, b: two_point_value(state, secs[a], secs[b])  # noqa: E731
    expected = w(0, 1) * w(2, 3) + w(0, 2) * w(1, 3) + w(0, 3) * w(1, 2)
    assert wick_n_point(state, secs) == pytest.approx(expected, rel=1e-12)


def test_time_cutoff_checks_window(state):
    with pytest.raises(ValueError):
        time_cutoff(state.grid, (0.0, 2.0))


@given(seed=st.integers(0, 2**10))
def test_localization_preserves_two_point(seed, state):
    rng = np.random.default_rng(seed)
    f, h = margined(state.grid, rng), margined(state.grid, rng)
    window = (2.0, 3.0)
    Tf = localize(state, f, window)
    assert state.grid.is_margined(Tf)
    assert abs(two_point_value(state, Tf, h) - two_point_value(state, f, h)) <= 1e-10 * max(abs(two_point_value(state, f, h)), 1.0)
    band = state.grid.position_mask(2 * 8 - 2, 2 * 12 + 2)
    assert not np.any(Tf[~band])


def test_single_mode_section_is_margined(state):
    f = single_mode_section(state, 3, 11)
    assert state.grid.is_margined(f)
    assert np.count_nonzero(np.abs(f) > 0) == 5 * np.count_nonzero(state.spectra.spec1.eigenvectors[:, 3])
