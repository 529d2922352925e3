from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from proca_lab.mesh import (
    build_complex,
    build_mesh,
    complex_residuals,
    export_csv,
    inner_product,
    load_mesh,
)


def test_circle_counts():
    m = build_mesh(1, [4], 1.0, 1.0)
    assert (m.n_nodes, m.n_edges, m.n_faces) == (4, 4, 0)


def test_torus_counts():
    m = build_mesh(2, [4, 4], 1.0, 1.0)
    assert (m.n_nodes, m.n_edges, m.n_faces) == (16, 32, 16)


def test_metric_table_is_stored_per_edge():
    table = [1.0, 2.0, 0.5, 3.0, 1.5, 0.25, 4.0, 1.0]
    m = build_mesh(1, [8], 0.5, table)
    np.testing.assert_array_equal(m.metric, table)
    assert m.spacing == (0.5,)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_metric_rejected(bad):
    with pytest.raises(ValueError):
        build_mesh(1, [4], 1.0, bad)


def test_table_with_nonpositive_entry_rejected():
    with pytest.raises(ValueError):
        build_mesh(1, [4], 1.0, [1.0, 1.0, 0.0, 1.0])


def test_small_axis_rejected():
    with pytest.raises(ValueError):
        build_mesh(2, [4, 2], 1.0)


def test_flat_circle_laplacian_is_circulant(flat_circle4):
    lap = flat_circle4.lap0.toarray()
    expected = np.array([[2, -1, 0, -1], [-1, 2, -1, 0], [0, -1, 2, -1], [-1, 0, -1, 2]], dtype=float)
    np.testing.assert_allclose(lap, expected, atol=1e-15)


def test_flat_circle_spectrum_matches_circulant_formula(flat_circle4):
    k = np.arange(4)
    closed_form = np.sort(2 - 2 * np.cos(2 * np.pi * k / 4))
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(flat_circle4.lap0.toarray()).real), closed_form, atol=1e-12)


def test_derivative_of_constant_vanishes(flat_circle4):
    assert np.all(flat_circle4.d0 @ np.ones(4) == 0)


def test_inner_product_examples(flat_circle4):
    assert inner_product(flat_circle4, 0, np.ones(4), np.ones(4)) == pytest.approx(4.0)
    e = np.zeros(4)
    e[0] = 1.0
    assert inner_product(flat_circle4, 1, e, e) == pytest.approx(1.0)
    x = np.arange(4)
    c1, c2 = np.cos(2 * np.pi * x / 4), np.sin(2 * np.pi * x / 4)
    assert abs(inner_product(flat_circle4, 0, c1, c2)) < 1e-15


def test_inner_product_degree_mismatch(flat_circle4):
    with pytest.raises(ValueError):
        inner_product(flat_circle4, 0, np.ones(4), np.ones(5))


def test_flat_torus_spectrum():
    cx = build_complex(build_mesh(2, [4, 4], 1.0))
    k = np.arange(4)
    one_d = 2 - 2 * np.cos(2 * np.pi * k / 4)
    closed_form = np.sort((one_d[:, None] + one_d[None, :]).ravel())
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(cx.lap0.toarray()).real), closed_form, atol=1e-12)


def test_weights_scale_with_metric():
    # h ≡ 4 on a circle: √h = 2 per node, h⁻¹√h = 1/2 per edge
    cx = build_complex(build_mesh(1, [4], 1.0, 4.0))
    np.testing.assert_allclose(cx.W0, 2.0)
    np.testing.assert_allclose(cx.W1, 0.5)


def test_json_and_csv_round_trip(tmp_path):
    path = tmp_path / "mesh.json"
    path.write_text(json.dumps({"dim": 2, "sizes": [3, 4], "spacing": [1.0, 0.5], "metric": "constant"}))
    m = load_mesh(path)
    assert m.sizes == (3, 4) and m.spacing == (1.0, 0.5)
    cx = build_complex(m)
    out = tmp_path / "d0.csv"
    export_csv(cx.d0, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "row,col,value"
    assert len(lines) - 1 == cx.d0.nnz


meshes = st.one_of(
    st.builds(
        lambda n, h, seed: build_mesh(1, [n], h, np.random.default_rng(seed).uniform(0.3, 3.0, n)),
        st.integers(3, 12),
        st.floats(0.2, 2.0),
        st.integers(0, 2**16),
    ),
    st.builds(
        lambda n0, n1, seed: build_mesh(2, [n0, n1], [1.0, 0.7], np.random.default_rng(seed).uniform(0.3, 3.0, 2 * n0 * n1)),
        st.integers(3, 6),
        st.integers(3, 6),
        st.integers(0, 2**16),
    ),
)


@given(meshes)
def test_complex_identities_hold_for_random_metrics(mesh):
    cx = build_complex(mesh)
    res = complex_residuals(cx)
    assert res["d1_d0"] == 0.0
    assert res["adjointness"] < 1e-12
    assert res["lap_intertwine"] < 1e-12


@given(meshes, st.integers(0, 2**16))
def test_laplacians_are_weighted_symmetric_and_nonnegative(mesh, seed):
    cx = build_complex(mesh)
    rng = np.random.default_rng(seed)
    for k in (0, 1):
        f, g = rng.standard_normal(cx.n_cells(k)), rng.standard_normal(cx.n_cells(k))
        lap = cx.laplacian(k)
        a = inner_product(cx, k, f, lap @ g)
        b = inner_product(cx, k, lap @ f, g)
        assert abs(a - b) <= 1e-12 * max(abs(a), 1.0)
        assert inner_product(cx, k, f, lap @ f) >= -1e-12


@given(meshes, st.integers(0, 2**16))
def test_inner_product_is_symmetric_and_positive(mesh, seed):
    cx = build_complex(mesh)
    rng = np.random.default_rng(seed)
    f, g = rng.standard_normal(cx.n_cells(1)), rng.standard_normal(cx.n_cells(1))
    assert inner_product(cx, 1, f, g) == pytest.approx(inner_product(cx, 1, g, f), rel=1e-14, abs=1e-14)
    assert inner_product(cx, 1, f, f) > 0
