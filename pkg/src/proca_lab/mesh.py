"""Periodic spatial lattices and their discrete Hodge complex.

Cells are stored as cochains: a 0-form holds point values at nodes, a
1-form holds the integral of the form along each edge, a 2-form the integral
over each face.  With that convention the exterior derivatives ``d0``, ``d1``
are pure signed incidence matrices and every metric dependence sits in the
diagonal weight matrices ``W0``, ``W1``, ``W2``.

Ordering (fixed so matrices are reproducible bit for bit):

* nodes are row-major with axis 0 fastest: ``node = i0 + n0 * i1``;
* edges are grouped by direction, axis-0 edges first; the edge with
  direction ``a`` that starts at node ``v`` has index ``a * n_nodes + v``;
* faces (dim 2 only) are indexed by their lower-left node.

The metric is diagonal.  ``SpatialMesh.metric`` stores, for every edge, the
metric component along that edge's direction at the edge midpoint.  Values
needed elsewhere (the transverse component at an edge, components at nodes
and faces) are arithmetic means of the neighbouring edge values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

MetricSpec = Union[float, int, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class SpatialMesh:
    dim: int
    sizes: tuple[int, ...]
    spacing: tuple[float, ...]
    metric: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.sizes) != self.dim or len(self.spacing) != self.dim:
            raise ValueError("sizes and spacing must have one entry per axis")
        if any(n < 3 for n in self.sizes):
            raise ValueError(f"every axis needs at least 3 cells, got {self.sizes}")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("spacing must be positive")
        if self.metric.shape != (self.n_edges,):
            raise ValueError(
                f"metric table must have one value per edge ({self.n_edges}), "
                f"got shape {self.metric.shape}"
            )
        if not np.all(np.isfinite(self.metric)) or np.any(self.metric <= 0):
            raise ValueError("metric values must be finite and positive")
        self.metric.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def n_edges(self) -> int:
        return self.dim * self.n_nodes

    @property
    def n_faces(self) -> int:
        return self.n_nodes if self.dim == 2 else 0

    def n_cells(self, k: int) -> int:
        return (self.n_nodes, self.n_edges, self.n_faces)[k]

    def edge_axis(self) -> np.ndarray:
        """Direction (axis index) of every edge."""
        return np.repeat(np.arange(self.dim), self.n_nodes)

    def with_metric(self, metric: np.ndarray) -> "SpatialMesh":
        return SpatialMesh(self.dim, self.sizes, self.spacing, np.array(metric, dtype=float))

    def same_lattice(self, other: "SpatialMesh") -> bool:
        return (
            self.dim == other.dim
            and self.sizes == other.sizes
            and np.allclose(self.spacing, other.spacing, rtol=0, atol=0)
        )

    def node_coords(self) -> np.ndarray:
        """Integer lattice coordinates of every node, shape (n_nodes, dim)."""
        idx = np.arange(self.n_nodes)
        if self.dim == 1:
            return idx[:, None]
        n0 = self.sizes[0]
        return np.stack([idx % n0, idx // n0], axis=1)


def _shift(mesh: SpatialMesh, axis: int, step: int = 1) -> np.ndarray:
    """Index of the node reached from every node by ``step`` cells along ``axis``."""
    coords = mesh.node_coords().copy()
    coords[:, axis] = (coords[:, axis] + step) % mesh.sizes[axis]
    if mesh.dim == 1:
        return coords[:, 0]
    return coords[:, 0] + mesh.sizes[0] * coords[:, 1]


def build_mesh(
    dim: int,
    sizes: Sequence[int],
    spacing: Union[float, Sequence[float]],
    metric_spec: MetricSpec = 1.0,
) -> SpatialMesh:
    """Build a periodic lattice.

    ``metric_spec`` is either a positive constant (isotropic metric ``h * I``)
    or a table with one positive value per edge, laid out in edge order.
    """
    sizes = tuple(int(n) for n in sizes)
    if len(sizes) != dim:
        raise ValueError(f"expected {dim} sizes, got {len(sizes)}")
    if np.isscalar(spacing):
        spacing_t = tuple(float(spacing) for _ in range(dim))
    else:
        spacing_t = tuple(float(s) for s in spacing)  # type: ignore[union-attr]
    n_edges = dim * int(np.prod(sizes)) if all(n >= 3 for n in sizes) else None
    if n_edges is None:
        raise ValueError(f"every axis needs at least 3 cells, got {sizes}")
    if np.isscalar(metric_spec):
        value = float(metric_spec)  # type: ignore[arg-type]
        if not value > 0:
            raise ValueError("metric constant must be positive")
        table = np.full(n_edges, value)
    else:
        table = np.asarray(metric_spec, dtype=float).reshape(-1)
        if table.size != n_edges:
            raise ValueError(f"metric table needs {n_edges} entries, got {table.size}")
        table = table.copy()
    return SpatialMesh(dim, sizes, spacing_t, table)


def mesh_from_dict(spec: dict) -> SpatialMesh:
    """Build a mesh from ``{dim, sizes, spacing, metric}``.

    ``metric`` may be the string ``"constant"`` (unit metric), a number, or a
    per-edge list.
    """
    metric = spec.get("metric", "constant")
    if isinstance(metric, str):
        if metric != "constant":
            raise ValueError(f"unknown metric keyword {metric!r}")
        metric = float(spec.get("metric_value", 1.0))
    return build_mesh(int(spec["dim"]), spec["sizes"], spec["spacing"], metric)


def load_mesh(path: Union[str, Path]) -> SpatialMesh:
    return mesh_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# metric sampling


def transverse_metric(mesh: SpatialMesh) -> np.ndarray:
    """Metric component orthogonal to each edge, at the edge midpoint (dim 2)."""
    if mesh.dim == 1:
        return np.ones(mesh.n_edges)
    nv = mesh.n_nodes
    h = mesh.metric
    out = np.empty(mesh.n_edges)
    for a in range(2):
        b = 1 - a
        start = np.arange(nv)
        end = _shift(mesh, a)
        # edges of direction b touching each endpoint: the one leaving it and the one arriving
        hb = h[b * nv : (b + 1) * nv]
        back_start = _shift(mesh, b, -1)
        back_end = back_start[end]
        out[a * nv : (a + 1) * nv] = 0.25 * (hb[start] + hb[back_start] + hb[end] + hb[back_end])
    return out


def node_metric(mesh: SpatialMesh) -> np.ndarray:
    """Diagonal metric components at nodes, shape (dim, n_nodes)."""
    nv = mesh.n_nodes
    h = mesh.metric
    comps = []
    for a in range(mesh.dim):
        ha = h[a * nv : (a + 1) * nv]
        comps.append(0.5 * (ha + ha[_shift(mesh, a, -1)]))
    return np.array(comps)


def face_metric(mesh: SpatialMesh) -> np.ndarray:
    """Diagonal metric components at face centres, shape (2, n_faces)."""
    if mesh.dim != 2:
        return np.zeros((2, 0))
    nv = mesh.n_nodes
    h = mesh.metric
    h0 = h[:nv]
    h1 = h[nv:]
    # face at node v is bounded by axis-0 edges at v and v+e1, axis-1 edges at v and v+e0
    return np.array([0.5 * (h0 + h0[_shift(mesh, 1)]), 0.5 * (h1 + h1[_shift(mesh, 0)])])


def hodge_weights(mesh: SpatialMesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diagonal inner-product weights (W0, W1, W2) for cochains.

    W0 = sqrt(det h) * cell volume, W1 = h^{aa} sqrt(det h) * cell volume / dx_a^2,
    W2 = h^{00} h^{11} sqrt(det h) * cell volume / (dx_0 dx_1)^2.
    """
    cell = float(np.prod(mesh.spacing))
    dx = np.asarray(mesh.spacing)
    hn = node_metric(mesh)
    w0 = np.sqrt(np.prod(hn, axis=0)) * cell
    h_along = mesh.metric
    det_e = h_along * transverse_metric(mesh)
    dx_e = dx[mesh.edge_axis()]
    w1 = np.sqrt(det_e) / h_along * cell / dx_e**2
    if mesh.dim == 2:
        hf = face_metric(mesh)
        w2 = np.sqrt(hf[0] * hf[1]) / (hf[0] * hf[1]) * cell / (dx[0] * dx[1]) ** 2
    else:
        w2 = np.zeros(0)
    return w0, w1, w2


def volume_density(mesh: SpatialMesh, k: int) -> np.ndarray:
    """sqrt(det h) sampled where k-cochains live (nodes, edges or faces)."""
    if k == 0:
        return np.sqrt(np.prod(node_metric(mesh), axis=0))
    if k == 1:
        return np.sqrt(mesh.metric * transverse_metric(mesh))
    hf = face_metric(mesh)
    return np.sqrt(hf[0] * hf[1])


# ---------------------------------------------------------------------------
# incidence


def incidence_d0(mesh: SpatialMesh) -> sp.csr_matrix:
    nv = mesh.n_nodes
    rows, cols, vals = [], [], []
    for a in range(mesh.dim):
        e = a * nv + np.arange(nv)
        rows += [e, e]
        cols += [np.arange(nv), _shift(mesh, a)]
        vals += [-np.ones(nv), np.ones(nv)]
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.n_edges, nv),
    )


def incidence_d1(mesh: SpatialMesh) -> sp.csr_matrix:
    nv = mesh.n_nodes
    if mesh.dim == 1:
        return sp.csr_matrix((0, mesh.n_edges))
    v = np.arange(nv)
    # counter-clockwise boundary: +e0(v) + e1(v+e0) - e0(v+e1) - e1(v)
    rows = np.concatenate([v, v, v, v])
    cols = np.concatenate([v, nv + _shift(mesh, 0), _shift(mesh, 1), nv + v])
    vals = np.concatenate([np.ones(nv), np.ones(nv), -np.ones(nv), -np.ones(nv)])
    return sp.csr_matrix((vals, (rows, cols)), shape=(nv, mesh.n_edges))


@dataclass(frozen=True)
class HodgeComplex:
    mesh: SpatialMesh
    d0: sp.csr_matrix
    d1: sp.csr_matrix
    W0: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    delta1: sp.csr_matrix
    delta2: sp.csr_matrix
    lap0: sp.csr_matrix
    lap1: sp.csr_matrix
    lap2: sp.csr_matrix

    def weights(self, k: int) -> np.ndarray:
        return (self.W0, self.W1, self.W2)[k]

    def laplacian(self, k: int) -> sp.csr_matrix:
        return (self.lap0, self.lap1, self.lap2)[k]

    def n_cells(self, k: int) -> int:
        return self.mesh.n_cells(k)


def weighted_adjoint(d: sp.spmatrix, w_src: np.ndarray, w_dst: np.ndarray) -> sp.csr_matrix:
    """Adjoint of ``d`` (src -> dst) for diagonal weights: W_src^-1 d^T W_dst."""
    return sp.csr_matrix(sp.diags(1.0 / w_src) @ d.T @ sp.diags(w_dst))


def build_complex(mesh: SpatialMesh) -> HodgeComplex:
    d0 = incidence_d0(mesh)
    d1 = incidence_d1(mesh)
    w0, w1, w2 = hodge_weights(mesh)
    delta1 = weighted_adjoint(d0, w0, w1)
    delta2 = weighted_adjoint(d1, w1, w2) if mesh.dim == 2 else sp.csr_matrix((mesh.n_edges, 0))
    lap0 = sp.csr_matrix(delta1 @ d0)
    lap1 = sp.csr_matrix(d0 @ delta1 + delta2 @ d1) if mesh.dim == 2 else sp.csr_matrix(d0 @ delta1)
    lap2 = sp.csr_matrix(d1 @ delta2) if mesh.dim == 2 else sp.csr_matrix((0, 0))
    return HodgeComplex(mesh, d0, d1, w0, w1, w2, delta1, delta2, lap0, lap1, lap2)


def inner_product(cx: HodgeComplex, k: int, f: np.ndarray, g: np.ndarray) -> float:
    """Weighted pairing f^T W_k g of two k-cochains (real or complex, no conjugation)."""
    n = cx.n_cells(k)
    if np.shape(f) != (n,) or np.shape(g) != (n,):
        raise ValueError(f"degree-{k} fields must have length {n}")
    return np.dot(f, cx.weights(k) * g)


def complex_residuals(cx: HodgeComplex, rng: np.random.Generator | None = None) -> dict[str, float]:
    """Structural residuals of a complex: d∘d, adjointness, Laplacian intertwining."""
    rng = rng or np.random.default_rng(0)
    out = {"d1_d0": float(abs(cx.d1 @ cx.d0).max()) if cx.mesh.dim == 2 else 0.0}
    inter = cx.lap1 @ cx.d0 - cx.d0 @ cx.lap0
    scale = max(abs(cx.lap1 @ cx.d0).max(), 1e-300)
    out["lap_intertwine"] = float(abs(inter).max() / scale) if inter.nnz else 0.0
    worst = 0.0
    for k, (d, delta) in enumerate([(cx.d0, cx.delta1), (cx.d1, cx.delta2)]):
        if d.shape[0] == 0:
            continue
        f = rng.standard_normal(cx.n_cells(k))
        g = rng.standard_normal(cx.n_cells(k + 1))
        lhs = inner_product(cx, k + 1, d @ f, g)
        rhs = inner_product(cx, k, f, delta @ g)
        denom = max(abs(lhs), abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / denom)
    out["adjointness"] = worst
    return out


def export_csv(matrix: sp.spmatrix, path: Union[str, Path]) -> None:
    """Write a sparse matrix as ``row,col,value`` triplets."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        fh.write("row,col,value\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r},{c},{v:.17g}\n")
