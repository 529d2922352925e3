"""Møller operators between lattice metrics joined by a convex interpolation.

For grids ``g₀`` (metric h₀), ``g_χ`` (interpolating h₀ -> h₁ inside a time
window) and ``g₁`` (metric h₁), with κ the diagonal fiber isometry::

    R₊ = κ_{χ0} - G⁺_χ (P_χ κ_{χ0} - κ_{χ0} P₀)          g₀ -> g_χ
    R₋ = κ_{1χ} - G⁻_1 (P₁ κ_{1χ} - κ_{1χ} P_χ)          g_χ -> g₁
    R  = R₋ R₊                                            g₀ -> g₁

with explicit inverses

    R₊⁻¹ = κ_{0χ} + G⁺_0 (κ_{0χ} P_χ - P₀ κ_{0χ})
    R₋⁻¹ = κ_{χ1} + G⁻_χ (κ_{χ1} P₁ - P_χ κ_{χ1})

Operators are materialized as dense matrices.  Adjoints use the signed
Lorentzian weights of the source and target grids.  Identities in which an
operator acts on a solution that reaches the edge of the time window are
compared on the interior band of the target grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .green import GreenPair, proca_green
from .spacetime import (
    SpacetimeGrid,
    adjoint,
    assemble_proca,
    build_grid,
    fiber_isometry,
    volume_ratio,
    OperatorHandle,
)
from .mesh import SpatialMesh


@dataclass(eq=False)
class MollerStep:
    """One factor R₊ or R₋ with the ingredients it was built from."""

    kind: str
    source: SpacetimeGrid
    target: SpacetimeGrid
    interpolated: SpacetimeGrid
    kappa: np.ndarray
    matrix: np.ndarray
    inverse: np.ndarray


@dataclass(eq=False)
class MollerOperator:
    source: SpacetimeGrid
    target: SpacetimeGrid
    steps: list[MollerStep]
    matrix: np.ndarray
    inverse: np.ndarray
    _adjoint: Optional[np.ndarray] = field(default=None, repr=False)

    def __matmul__(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ f

    def handle(self) -> OperatorHandle:
        return OperatorHandle("generic", self.matrix, self.source, self.target)

    def adjoint_matrix(self) -> np.ndarray:
        if self._adjoint is None:
            self._adjoint = moller_adjoint(self).dense()
        return self._adjoint

    @property
    def kappa(self) -> np.ndarray:
        """Diagonal of the composed fiber isometry source -> target."""
        out = np.ones(self.source.n_dofs)
        for st in self.steps:
            out = out * st.kappa
        return out


def _check_static_past(grid0: SpacetimeGrid, grid_chi: SpacetimeGrid) -> None:
    M = grid0.margin
    if not grid0.same_layout(grid_chi):
        raise ValueError("grids must share the lattice and the time axis")
    if not np.array_equal(grid0.metric_slices[: M + 1], grid_chi.metric_slices[: M + 1]):
        raise ValueError("interpolated grid does not match the source in the past margin")
    if not np.array_equal(grid0.half_metric_slices[:M], grid_chi.half_metric_slices[:M]):
        raise ValueError("interpolated grid does not match the source in the past margin")


def _check_static_future(grid_chi: SpacetimeGrid, grid1: SpacetimeGrid) -> None:
    Nt, M = grid1.time_steps, grid1.margin
    if not grid1.same_layout(grid_chi):
        raise ValueError("grids must share the lattice and the time axis")
    if not np.array_equal(grid1.metric_slices[Nt - 1 - M :], grid_chi.metric_slices[Nt - 1 - M :]):
        raise ValueError("interpolated grid does not match the target in the future margin")
    if not np.array_equal(grid1.half_metric_slices[Nt - 1 - M :], grid_chi.half_metric_slices[Nt - 1 - M :]):
        raise ValueError("interpolated grid does not match the target in the future margin")


def _solve_columns(solver, rhs: sp.spmatrix) -> np.ndarray:
    return solver.solve(rhs.toarray(), check=False)


def moller_plus(
    grid0: SpacetimeGrid,
    grid_chi: SpacetimeGrid,
    green_chi: Optional[GreenPair] = None,
    green0: Optional[GreenPair] = None,
) -> MollerStep:
    """R₊: g₀ -> g_χ, acting as κ (the identity) before the window."""
    _check_static_past(grid0, grid_chi)
    green_chi = green_chi or proca_green(grid_chi)
    green0 = green0 or proca_green(grid0)
    K = fiber_isometry(grid0, grid_chi).matrix
    Kinv = fiber_isometry(grid_chi, grid0).matrix
    P0 = assemble_proca(grid0).matrix
    Pc = green_chi.operator.matrix
    R = K.toarray() - _solve_columns(green_chi.plus, Pc @ K - K @ P0)
    Rinv = Kinv.toarray() + _solve_columns(green0.plus, Kinv @ Pc - P0 @ Kinv)
    return MollerStep("plus", grid0, grid_chi, grid_chi, K.diagonal(), R, Rinv)


def moller_minus(
    grid_chi: SpacetimeGrid,
    grid1: SpacetimeGrid,
    green1: Optional[GreenPair] = None,
    green_chi: Optional[GreenPair] = None,
) -> MollerStep:
    """R₋: g_χ -> g₁, acting as κ (the identity) after the window."""
    _check_static_future(grid_chi, grid1)
    green1 = green1 or proca_green(grid1)
    green_chi = green_chi or proca_green(grid_chi)
    K = fiber_isometry(grid_chi, grid1).matrix
    Kinv = fiber_isometry(grid1, grid_chi).matrix
    Pc = green_chi.operator.matrix
    P1 = green1.operator.matrix
    R = K.toarray() - _solve_columns(green1.minus, P1 @ K - K @ Pc)
    Rinv = Kinv.toarray() + _solve_columns(green_chi.minus, Kinv @ P1 - Pc @ Kinv)
    return MollerStep("minus", grid_chi, grid1, grid_chi, K.diagonal(), R, Rinv)


def compose_chain(steps: Sequence, grid: Optional[SpacetimeGrid] = None) -> MollerOperator:
    """Product of steps applied in order (first step acts first).

    Steps may be MollerStep or MollerOperator instances.  An empty chain needs
    ``grid`` and yields the identity on it.
    """
    flat: list[MollerStep] = []
    for s in steps:
        flat.extend(s.steps if isinstance(s, MollerOperator) else [s])
    if not flat:
        if grid is None:
            raise ValueError("an empty chain needs a grid")
        eye = np.eye(grid.n_dofs)
        return MollerOperator(grid, grid, [], eye, eye.copy())
    for a, b in zip(flat, flat[1:]):
        if a.target is not b.source and not (
            a.target.same_layout(b.source) and np.array_equal(a.target.metric_slices, b.source.metric_slices)
            and np.array_equal(a.target.half_metric_slices, b.source.half_metric_slices)
        ):
            raise ValueError("consecutive Møller steps do not share a grid")
    matrix = flat[0].matrix
    inverse = flat[0].inverse
    for st in flat[1:]:
        matrix = st.matrix @ matrix
        inverse = inverse @ st.inverse
    return MollerOperator(flat[0].source, flat[-1].target, flat, matrix, inverse)


def interpolated_grid(
    mesh0: SpatialMesh,
    mesh1: SpatialMesh,
    like: SpacetimeGrid,
    window: tuple[float, float],
    label: str = "g_chi",
) -> SpacetimeGrid:
    return build_grid(mesh0, mesh1, "smoothstep", like.time_steps, like.dt, like.margin, mass_sq=like.mass_sq, window=window, label=label)


@dataclass(eq=False)
class MollerSetup:
    """Grids, Green pairs and the single-step Møller operator g₀ -> g₁."""

    grid0: SpacetimeGrid
    grid_chi: SpacetimeGrid
    grid1: SpacetimeGrid
    green0: GreenPair
    green_chi: GreenPair
    green1: GreenPair
    plus: MollerStep
    minus: MollerStep
    R: MollerOperator


def build_moller(
    mesh0: SpatialMesh,
    mesh1: SpatialMesh,
    Nt: int,
    dt: float,
    mass_sq: float,
    window: Optional[tuple[float, float]] = None,
    margins: Optional[int] = None,
) -> MollerSetup:
    grid0 = build_grid(mesh0, mesh0, "zero", Nt, dt, margins, mass_sq=mass_sq, label="g0")
    grid1 = build_grid(mesh1, mesh1, "zero", Nt, dt, margins, mass_sq=mass_sq, label="g1")
    if window is None:
        window = ((grid0.margin + 2) * dt, (Nt - 3 - grid0.margin) * dt)
    grid_chi = build_grid(mesh0, mesh1, "smoothstep", Nt, dt, margins, mass_sq=mass_sq, window=window, label="g_chi")
    g0, gc, g1 = proca_green(grid0), proca_green(grid_chi), proca_green(grid1)
    plus = moller_plus(grid0, grid_chi, gc, g0)
    minus = moller_minus(grid_chi, grid1, g1, gc)
    return MollerSetup(grid0, grid_chi, grid1, g0, gc, g1, plus, minus, compose_chain([plus, minus]))


# ---------------------------------------------------------------------------
# adjoints and identities


def moller_adjoint(R: MollerOperator | MollerStep) -> OperatorHandle:
    """R† = W_source⁻¹ Rᵀ W_target, a map target sections -> source sections."""
    return adjoint(OperatorHandle("generic", R.matrix, R.source, R.target))


def inverse_adjoint(R: MollerOperator) -> OperatorHandle:
    """(R⁻¹)†, a map source sections -> target sections."""
    return adjoint(OperatorHandle("generic", R.inverse, R.target, R.source))


def closed_form_plus_adjoint(step: MollerStep, green_chi: GreenPair) -> np.ndarray:
    """P₀ (κ_{χ0})† G⁻_χ as a dense matrix; (κ_{χ0})† = C κ_{0χ} with C the volume ratio."""
    if step.kind != "plus":
        raise ValueError("closed form applies to R₊")
    P0 = assemble_proca(step.source).matrix
    C = volume_ratio(step.source, step.target)
    kdag = C / step.kappa
    Gm = green_chi.minus.matrix()
    return P0 @ (kdag[:, None] * Gm)


def relative(residual: np.ndarray, reference: np.ndarray) -> float:
    return float(np.linalg.norm(residual) / max(np.linalg.norm(reference), 1e-300))


def verify_moller(setup: MollerSetup, sections: Sequence[np.ndarray], past: Sequence[np.ndarray], future: Sequence[np.ndarray]) -> dict[str, float]:
    """Residuals of every Møller identity on a battery of margined sections.

    ``past`` / ``future`` are margined sections supported before / after the
    interpolation window.
    """
    R = setup.R
    g0, g1 = setup.grid0, setup.grid1
    I0, I1 = g0.interior_mask, g1.interior_mask
    P0 = setup.green0.operator.matrix
    P1 = setup.green1.operator.matrix
    F = np.column_stack(sections)
    out: dict[str, float] = {}

    out["inverse"] = relative(R.inverse @ (R.matrix @ F) - F, F)
    out["inverse_plus"] = relative(setup.plus.inverse @ (setup.plus.matrix @ F) - F, F)
    out["inverse_minus"] = relative(setup.minus.inverse @ (setup.minus.matrix @ F) - F, F)

    Fp = np.column_stack(past)
    Ff = np.column_stack(future)
    out["past_identity"] = relative(setup.plus.matrix @ Fp - Fp, Fp)
    out["future_identity"] = relative(setup.minus.matrix @ Ff - Ff, Ff)

    k01 = 1.0 / R.kappa
    lhs = k01[:, None] * (P1 @ (R.matrix @ F))
    out["intertwining"] = relative((lhs - P0 @ F)[I0], (P0 @ F)[I0])

    Rdag = R.adjoint_matrix()
    H = F  # same layout on both grids
    W0, W1 = g0.weights_1form, g1.weights_1form
    lhs_pair = np.einsum("ia,ib->ab", H * W1[:, None], R.matrix @ F)
    rhs_pair = np.einsum("ia,ib->ab", Rdag @ H * W0[:, None], F)
    out["adjoint_duality"] = relative(lhs_pair - rhs_pair, lhs_pair)

    inv_adj = inverse_adjoint(R).dense()
    out["inverse_adjoint"] = relative(inv_adj @ (Rdag @ F) - F, F)

    closed = closed_form_plus_adjoint(setup.plus, setup.green_chi)
    plus_dag = moller_adjoint(setup.plus).dense()
    out["closed_form_plus_adjoint"] = relative((plus_dag @ F - closed @ F)[I0], (plus_dag @ F)[I0])

    G0 = setup.green0
    G1 = setup.green1
    RdagF = _margined(g0, Rdag @ F)
    push = R.matrix @ np.column_stack([G0.propagate(c) for c in RdagF.T])
    direct = np.column_stack([G1.propagate(c) for c in F.T])
    out["pushforward"] = relative((push - direct)[I1], direct[I1])

    # R† P' (κ_{g g'})† = P, where (κ_{g g'})† = κ_{g' g} / C with C the volume ratio
    C = volume_ratio(g0, g1)
    kdag = R.kappa / C
    lhs = Rdag @ (P1 @ (kdag[:, None] * F))
    out["adjoint_intertwining"] = relative((lhs - P0 @ F)[I0], (P0 @ F)[I0])

    sols = np.column_stack([G0.propagate(c) for c in F.T])
    out["solutions_to_solutions"] = relative((P1 @ (R.matrix @ sols))[I1], sols[I1])
    return out


def _margined(grid: SpacetimeGrid, X: np.ndarray) -> np.ndarray:
    out = np.array(X, copy=True)
    outside = ~grid.margined_mask()
    scale = max(float(np.abs(out).max()), 1e-300)
    if np.abs(out[outside]).max(initial=0.0) > 1e-9 * scale:
        raise ValueError("section leaves the margins")
    out[outside] = 0.0
    return out
