"""Staggered spacetime lattice, Lorentzian pairing and the N, P, Q operators.

A spacetime 1-form ``A = A⁰ dt + A¹`` is stored time-interleaved by
*position*:

* position ``2n``   holds ``A¹(n)``, a spatial 1-cochain at time level n
  (n = 0 .. Nt-1);
* position ``2n+1`` holds ``A⁰(n+½)``, a spatial 0-cochain on the temporal
  edge from level n to n+1 (n = 0 .. Nt-2), integrated over that edge.

Spacetime 0-forms live on level nodes ``φ(n)``.  Spacetime 2-forms have a
mixed part ``F_te(n+½)`` on (temporal edge × spatial edge) and a purely
spatial part ``F_ss(n)`` on faces.  The exterior derivative is pure
incidence and the Lorentzian pairing (signature -,+,+) is a diagonal signed
weight per cell, so the codifferential is ``δ = W⁻¹ dᵀ W`` exactly.

The lapse is one everywhere.  The spatial metric of the slice at time ``t``
is ``(1 - χ(t)) h₀ + χ(t) h₁``; it is sampled at integer levels (for A¹,
0-forms and spatial faces) and at half levels (for A⁰ and mixed faces).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp

from .mesh import HodgeComplex, SpatialMesh, build_complex, export_csv, mesh_from_dict

ChiProfile = Union[str, Callable[[float], float]]


def smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def chi_values(profile: ChiProfile, times: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    """Evaluate an interpolation profile at the given times."""
    if profile == "zero":
        return np.zeros_like(times)
    if profile == "one":
        return np.ones_like(times)
    if profile == "smoothstep":
        t_a, t_b = window
        if not t_b > t_a:
            raise ValueError("smoothstep window must have t_b > t_a")
        return smoothstep((times - t_a) / (t_b - t_a))
    if callable(profile):
        return np.array([float(profile(t)) for t in times])
    raise ValueError(f"unknown chi profile {profile!r}")


@dataclass(frozen=True, eq=False)
class SpacetimeGrid:
    time_steps: int
    dt: float
    base_mesh: SpatialMesh
    metric_slices: np.ndarray = field(repr=False)
    half_metric_slices: np.ndarray = field(repr=False)
    mass_sq: float
    margin: int
    label: str = "g"

    def __post_init__(self) -> None:
        Nt, E = self.time_steps, self.base_mesh.n_edges
        if self.metric_slices.shape != (Nt, E) or self.half_metric_slices.shape != (Nt - 1, E):
            raise ValueError("metric slice tables have the wrong shape")
        if np.any(self.metric_slices <= 0) or np.any(self.half_metric_slices <= 0):
            raise ValueError("slice metrics must be positive")

    # -- sizes and layout -------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return self.base_mesh.n_nodes

    @property
    def n_edges(self) -> int:
        return self.base_mesh.n_edges

    @property
    def n_faces(self) -> int:
        return self.base_mesh.n_faces

    @property
    def n_positions(self) -> int:
        return 2 * self.time_steps - 1

    def position_size(self, p: int) -> int:
        return self.n_edges if p % 2 == 0 else self.n_nodes

    @cached_property
    def offsets(self) -> np.ndarray:
        sizes = [self.position_size(p) for p in range(self.n_positions)]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    @property
    def n_dofs(self) -> int:
        return int(self.offsets[-1])

    def position_slice(self, p: int) -> slice:
        return slice(int(self.offsets[p]), int(self.offsets[p + 1]))

    def a1_slice(self, n: int) -> slice:
        return self.position_slice(2 * n)

    def a0_slice(self, n: int) -> slice:
        """Slice of A⁰(n+½)."""
        return self.position_slice(2 * n + 1)

    @cached_property
    def dof_position(self) -> np.ndarray:
        """Position index of every dof."""
        return np.repeat(np.arange(self.n_positions), np.diff(self.offsets))

    def position_mask(self, lo: int, hi: int) -> np.ndarray:
        """Boolean dof mask for positions lo..hi inclusive."""
        pos = self.dof_position
        return (pos >= lo) & (pos <= hi)

    def margined_mask(self, margin: Optional[int] = None) -> np.ndarray:
        """Dofs allowed to be nonzero in a section with the given temporal margin."""
        M = self.margin if margin is None else margin
        return self.position_mask(2 * M, 2 * (self.time_steps - 1 - M))

    @cached_property
    def interior_mask(self) -> np.ndarray:
        """Dofs away from the two outermost positions at each end of the window."""
        return self.position_mask(2, self.n_positions - 3)

    def is_margined(self, f: np.ndarray, margin: Optional[int] = None) -> bool:
        return not np.any(np.asarray(f)[~self.margined_mask(margin)])

    # -- metric and complexes per level -------------------------------------
    @cached_property
    def level_complexes(self) -> list[HodgeComplex]:
        return _complexes_for(self.base_mesh, self.metric_slices)

    @cached_property
    def half_complexes(self) -> list[HodgeComplex]:
        return _complexes_for(self.base_mesh, self.half_metric_slices)

    @property
    def is_ultrastatic(self) -> bool:
        ref = self.metric_slices[0]
        return bool(np.all(self.metric_slices == ref) and np.all(self.half_metric_slices == ref))

    def same_layout(self, other: "SpacetimeGrid") -> bool:
        return (
            self.time_steps == other.time_steps
            and self.dt == other.dt
            and self.base_mesh.same_lattice(other.base_mesh)
        )

    def time_shift(self, f: np.ndarray, steps: int) -> np.ndarray:
        """Translate a section later in time by an integer number of levels."""
        out = np.zeros_like(f)
        shift = int(self.offsets[2 * abs(steps)]) if steps else 0
        if steps == 0:
            return np.array(f, copy=True)
        if steps > 0:
            out[shift:] = f[: f.size - shift]
            lost = f[f.size - shift :]
        else:
            out[: f.size - shift] = f[shift:]
            lost = f[:shift]
        if np.any(lost):
            raise ValueError("time shift moves support off the grid")
        return out

    # -- weights -------------------------------------------------------------
    @cached_property
    def weights_1form(self) -> np.ndarray:
        """Signed Lorentzian weights of 1-form dofs (A⁰ negative, A¹ positive)."""
        dt = self.dt
        parts = []
        for p in range(self.n_positions):
            n = p // 2
            if p % 2 == 0:
                parts.append(self.level_complexes[n].W1 * dt)
            else:
                parts.append(-self.half_complexes[n].W0 / dt)
        return np.concatenate(parts)

    @cached_property
    def weights_0form(self) -> np.ndarray:
        return np.concatenate([cx.W0 * self.dt for cx in self.level_complexes])

    @cached_property
    def weights_2form(self) -> np.ndarray:
        """Mixed faces (all half levels) first, then spatial faces (all levels)."""
        te = [-cx.W1 / self.dt for cx in self.half_complexes]
        ss = [cx.W2 * self.dt for cx in self.level_complexes]
        return np.concatenate(te + ss)

    # -- exterior derivatives ------------------------------------------------
    @cached_property
    def d_st0(self) -> sp.csr_matrix:
        """0-forms -> 1-forms: A⁰(n+½) = φ(n+1) - φ(n), A¹(n) = d0 φ(n)."""
        Nt, V = self.time_steps, self.n_nodes
        d0 = self.level_complexes[0].d0
        blocks = [[None] * Nt for _ in range(self.n_positions)]
        eye = sp.identity(V, format="csr")
        for n in range(Nt):
            blocks[2 * n][n] = d0
            if n < Nt - 1:
                blocks[2 * n + 1][n] = -eye
                blocks[2 * n + 1][n + 1] = eye
        return _bmat(blocks, [self.position_size(p) for p in range(self.n_positions)], [V] * Nt)

    @cached_property
    def d_st1(self) -> sp.csr_matrix:
        """1-forms -> 2-forms: F_te = A¹(n+1) - A¹(n) - d0 A⁰(n+½), F_ss = d1 A¹(n)."""
        Nt, E, F = self.time_steps, self.n_edges, self.n_faces
        cx = self.level_complexes[0]
        eye = sp.identity(E, format="csr")
        n_rows = (Nt - 1) + (Nt if F else 0)
        blocks = [[None] * self.n_positions for _ in range(n_rows)]
        for n in range(Nt - 1):
            blocks[n][2 * n] = -eye
            blocks[n][2 * n + 2] = eye
            blocks[n][2 * n + 1] = -cx.d0
        if F:
            for n in range(Nt):
                blocks[Nt - 1 + n][2 * n] = cx.d1
        row_sizes = [E] * (Nt - 1) + ([F] * Nt if F else [])
        return _bmat(blocks, row_sizes, [self.position_size(p) for p in range(self.n_positions)])

    @cached_property
    def delta_st1(self) -> sp.csr_matrix:
        """Codifferential 1-forms -> 0-forms."""
        return _adjoint_matrix(self.d_st0, self.weights_0form, self.weights_1form)

    @cached_property
    def delta_st2(self) -> sp.csr_matrix:
        """Codifferential 2-forms -> 1-forms."""
        return _adjoint_matrix(self.d_st1, self.weights_1form, self.weights_2form)

    @cached_property
    def kappa_factors(self) -> np.ndarray:
        """Per-dof metric along each spatial edge (ones on A⁰ dofs); used by κ."""
        parts = []
        for p in range(self.n_positions):
            if p % 2 == 0:
                parts.append(self.metric_slices[p // 2])
            else:
                parts.append(np.ones(self.n_nodes))
        return np.concatenate(parts)


def _complexes_for(mesh: SpatialMesh, tables: np.ndarray) -> list[HodgeComplex]:
    cache: dict[bytes, HodgeComplex] = {}
    out = []
    for row in tables:
        key = row.tobytes()
        if key not in cache:
            cache[key] = build_complex(mesh.with_metric(row))
        out.append(cache[key])
    return out


def _bmat(blocks, row_sizes, col_sizes) -> sp.csr_matrix:
    # scipy's bmat cannot infer sizes of all-None rows/columns, so pad explicitly
    for i, rs in enumerate(row_sizes):
        if blocks[i][0] is None:
            blocks[i][0] = sp.csr_matrix((rs, col_sizes[0]))
    for j, cs in enumerate(col_sizes):
        if blocks[0][j] is None:
            blocks[0][j] = sp.csr_matrix((row_sizes[0], cs))
    return sp.csr_matrix(sp.bmat(blocks, format="csr"))


def _adjoint_matrix(d: sp.spmatrix, w_src: np.ndarray, w_dst: np.ndarray) -> sp.csr_matrix:
    return sp.csr_matrix(sp.diags(1.0 / w_src) @ d.T @ sp.diags(w_dst))


# ---------------------------------------------------------------------------
# construction


def stability_limit(mesh: SpatialMesh) -> float:
    """Largest dt allowed by the explicit-solve bound dt < spacing / sqrt(max h^♯)."""
    h_inv_max = float(np.max(1.0 / mesh.metric))
    return min(mesh.spacing) / np.sqrt(h_inv_max)


def _gershgorin(cx: HodgeComplex) -> float:
    out = 0.0
    for lap in (cx.lap0, cx.lap1):
        out = max(out, float(np.max(np.asarray(abs(lap).sum(axis=1)))))
    return out


def build_grid(
    mesh0: SpatialMesh,
    mesh1: SpatialMesh,
    chi_profile: ChiProfile,
    Nt: int,
    dt: float,
    margins: Optional[int] = None,
    *,
    mass_sq: float = 1.0,
    window: Optional[tuple[float, float]] = None,
    label: str = "g",
) -> SpacetimeGrid:
    """Spacetime grid whose slice metric interpolates mesh0.metric -> mesh1.metric.

    ``chi_profile`` is ``"zero"``, ``"one"``, ``"smoothstep"`` (needs ``window``
    in time units) or a callable t -> [0, 1].  Slices inside the past margin
    must carry h₀ and slices inside the future margin h₁.
    """
    if not mesh0.same_lattice(mesh1):
        raise ValueError("mesh0 and mesh1 must share dim, sizes and spacing")
    if Nt < 8:
        raise ValueError("Nt must be at least 8")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not mass_sq > 0:
        raise ValueError("mass_sq must be positive")
    M = Nt // 8 if margins is None else int(margins)
    if M < 1 or 2 * M + 2 > Nt:
        raise ValueError(f"margin {M} is too small or too large for Nt={Nt}")
    if window is None:
        window = (0.25 * (Nt - 1) * dt, 0.75 * (Nt - 1) * dt)
    t_int = np.arange(Nt) * dt
    t_half = (np.arange(Nt - 1) + 0.5) * dt
    chi_i = chi_values(chi_profile, t_int, window)
    chi_h = chi_values(chi_profile, t_half, window)
    if np.any(chi_i < 0) or np.any(chi_i > 1) or np.any(chi_h < 0) or np.any(chi_h > 1):
        raise ValueError("chi must take values in [0, 1]")
    h0, h1 = mesh0.metric, mesh1.metric
    if not np.array_equal(h0, h1):
        if np.any(chi_i[: M + 1] != 0) or np.any(chi_h[:M] != 0):
            raise ValueError("chi must vanish on the past margin")
        if np.any(chi_i[Nt - 1 - M :] != 1) or np.any(chi_h[Nt - 1 - M :] != 1):
            raise ValueError("chi must equal one on the future margin")
    slices = (1 - chi_i)[:, None] * h0[None, :] + chi_i[:, None] * h1[None, :]
    half = (1 - chi_h)[:, None] * h0[None, :] + chi_h[:, None] * h1[None, :]
    for table in (slices, half):
        limit = stability_limit(mesh0.with_metric(table.min(axis=0)))
        if not dt < limit:
            raise ValueError(f"dt={dt} violates the stability bound dt < {limit:.6g}")
    grid = SpacetimeGrid(Nt, float(dt), mesh0, slices, half, float(mass_sq), M, label)
    lam_max = max(_gershgorin(cx) for cx in grid.level_complexes + grid.half_complexes)
    if dt * np.sqrt(lam_max + mass_sq) >= 2.0:
        raise ValueError(
            f"dt={dt} makes the leapfrog recursion unstable (needs dt*sqrt(λmax+m²) < 2, "
            f"λmax ≤ {lam_max:.6g})"
        )
    return grid


def ultrastatic_grid(mesh: SpatialMesh, Nt: int, dt: float, mass_sq: float = 1.0, margins: Optional[int] = None, label: str = "g") -> SpacetimeGrid:
    return build_grid(mesh, mesh, "zero", Nt, dt, margins, mass_sq=mass_sq, label=label)


def grid_from_dict(spec: dict) -> tuple[SpacetimeGrid, SpatialMesh, SpatialMesh]:
    """Build a grid from the JSON layout used by scenarios; returns (grid, mesh0, mesh1)."""
    mesh0 = mesh_from_dict(spec["mesh0"])
    mesh1 = mesh_from_dict(spec.get("mesh1", spec["mesh0"]))
    window = tuple(spec["window"]) if "window" in spec else None
    grid = build_grid(
        mesh0,
        mesh1,
        spec.get("chi", "zero"),
        int(spec["Nt"]),
        float(spec["dt"]),
        spec.get("margins"),
        mass_sq=float(spec.get("mass_sq", 1.0)),
        window=window,  # type: ignore[arg-type]
    )
    return grid, mesh0, mesh1


def load_grid(path: Union[str, Path]) -> SpacetimeGrid:
    return grid_from_dict(json.loads(Path(path).read_text()))[0]


# ---------------------------------------------------------------------------
# pairing and operators


def lorentz_pairing(grid: SpacetimeGrid, f: np.ndarray, g: np.ndarray, check: bool = True) -> float:
    """Σ over cells of f·g weighted by the signed Lorentzian weights."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape[0] != grid.n_dofs or g.shape[0] != grid.n_dofs:
        raise ValueError("sections do not match the grid")
    if check:
        ends = ~grid.position_mask(1, grid.n_positions - 2)
        if np.any(f[ends]) and np.any(g[ends]):
            raise ValueError("both sections are nonzero at the temporal boundary")
    return np.dot(f, grid.weights_1form * g)


@dataclass(frozen=True, eq=False)
class OperatorHandle:
    kind: str
    matrix: Union[sp.csr_matrix, np.ndarray]
    source: SpacetimeGrid
    target: SpacetimeGrid

    def __matmul__(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ f

    def dense(self) -> np.ndarray:
        m = self.matrix
        return m.toarray() if sp.issparse(m) else np.asarray(m)


def assemble_kg(grid: SpacetimeGrid) -> OperatorHandle:
    """N = δd + dδ + m² on spacetime 1-forms."""
    m = grid.delta_st2 @ grid.d_st1 + grid.d_st0 @ grid.delta_st1
    m = m + grid.mass_sq * sp.identity(grid.n_dofs)
    return OperatorHandle("KG", sp.csr_matrix(m), grid, grid)


def assemble_proca(grid: SpacetimeGrid) -> OperatorHandle:
    """P = δd + m² on spacetime 1-forms."""
    m = grid.delta_st2 @ grid.d_st1 + grid.mass_sq * sp.identity(grid.n_dofs)
    return OperatorHandle("Proca", sp.csr_matrix(m), grid, grid)


def assemble_q(grid: SpacetimeGrid) -> OperatorHandle:
    """Q = Id + m⁻² dδ on spacetime 1-forms."""
    m = sp.identity(grid.n_dofs) + (grid.d_st0 @ grid.delta_st1) / grid.mass_sq
    return OperatorHandle("Q", sp.csr_matrix(m), grid, grid)


def codifferential(grid: SpacetimeGrid, f: np.ndarray) -> np.ndarray:
    """δ of a spacetime 1-form (a spacetime 0-form on levels)."""
    return grid.delta_st1 @ f


def fiber_isometry(grid_a: SpacetimeGrid, grid_b: SpacetimeGrid) -> OperatorHandle:
    """κ_{BA}: keeps A⁰ and rescales each A¹ edge value by sqrt(h_B / h_A)."""
    if not grid_a.same_layout(grid_b):
        raise ValueError("grids must share the lattice and time axis")
    scale = np.sqrt(grid_b.kappa_factors / grid_a.kappa_factors)
    return OperatorHandle("kappa", sp.diags(scale, format="csr"), grid_a, grid_b)


def volume_ratio(grid_a: SpacetimeGrid, grid_b: SpacetimeGrid) -> np.ndarray:
    """Per-dof ratio C = (κᵀ W_B κ) / W_A, so that κ† = C κ⁻¹."""
    k = fiber_isometry(grid_a, grid_b).matrix.diagonal()
    return k * grid_b.weights_1form * k / grid_a.weights_1form


def adjoint(T: OperatorHandle, grid_a: Optional[SpacetimeGrid] = None, grid_b: Optional[SpacetimeGrid] = None) -> OperatorHandle:
    """T† = W_A⁻¹ Tᵀ W_B for T mapping A-sections to B-sections."""
    grid_a = grid_a or T.source
    grid_b = grid_b or T.target
    m = T.matrix
    if m.shape != (grid_b.n_dofs, grid_a.n_dofs):
        raise ValueError(f"operator shape {m.shape} does not map the given grids")
    wa, wb = grid_a.weights_1form, grid_b.weights_1form
    if sp.issparse(m):
        out = sp.csr_matrix(sp.diags(1.0 / wa) @ m.T @ sp.diags(wb))
    else:
        out = (m.T * wb[None, :]) / wa[:, None]
    return OperatorHandle("generic" if T.kind != "KG" and T.kind != "Proca" else T.kind, out, grid_b, grid_a)


def export_operator_csv(T: OperatorHandle, path: Union[str, Path]) -> None:
    export_csv(sp.csr_matrix(T.matrix), path)
