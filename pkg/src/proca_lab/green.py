"""Retarded and advanced Green operators by causal block substitution.

The operators N and P couple each time position only to a few neighbouring
positions.  Let ``k`` be the number of positions an operator "reaches ahead"
(``k = 2`` for N, whose A¹ row is a leapfrog step and whose A⁰ row is
likewise second order in time; ``k = 1`` for P, whose A⁰ row is a constraint
and only first order).  The retarded solution of ``Op u = f``:

* forces u to vanish on the first k positions (zero data in the past);
* imposes the equation on every row except the last k positions.

The remaining square system is block lower triangular with small diagonal
blocks, one per time step, so it is solved by forward substitution.  The
advanced solution is the mirror image.  A second, independent path solves
the same restricted system densely; the two agree to solver precision.

Because the retarded system drops the last rows and the advanced one the
first rows, the advanced matrix is exactly the Lorentzian adjoint of the
retarded one.  Identities where an operator hits a non-compact solution are
exact only away from the two outermost positions at either end; callers
compare there (``SpacetimeGrid.interior_mask``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .spacetime import OperatorHandle, SpacetimeGrid, assemble_kg, assemble_proca

REACH = {"KG": 2, "Proca": 1}


@dataclass(frozen=True)
class _Step:
    rows: np.ndarray
    cols: np.ndarray
    coupling: sp.csr_matrix  # op[rows, :]
    lu: tuple


@dataclass(eq=False)
class GreenSolver:
    """Causal inverse of a KG or Proca operator; factorization is built once."""

    operator: OperatorHandle
    direction: str
    check_margins: bool = True
    _steps: list[_Step] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.direction not in ("retarded", "advanced"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.operator.kind not in REACH:
            raise ValueError("Green solvers exist for KG and Proca operators only")
        self._steps = self._factorize()

    @property
    def grid(self) -> SpacetimeGrid:
        return self.operator.source

    @property
    def reach(self) -> int:
        return REACH[self.operator.kind]

    def _causal_position(self, p: int) -> int:
        """Map a position index into the frame where solving runs forwards."""
        L = self.grid.n_positions
        return p if self.direction == "retarded" else L - 1 - p

    def _dofs(self, positions) -> np.ndarray:
        g = self.grid
        parts = [np.arange(g.offsets[p], g.offsets[p + 1]) for p in sorted(positions)]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=int)

    @cached_property
    def forced_positions(self) -> list[int]:
        return [self._causal_position(p) for p in range(self.reach)]

    @cached_property
    def dropped_positions(self) -> list[int]:
        L = self.grid.n_positions
        return [self._causal_position(p) for p in range(L - self.reach, L)]

    def _factorize(self) -> list[_Step]:
        g = self.grid
        k = self.reach
        L = g.n_positions
        A = sp.csr_matrix(self.operator.matrix)
        steps = []
        solved_cols: set[int] = set(self.forced_positions)
        for j in range(g.time_steps - 1):
            col_pos = {self._causal_position(q) for q in (2 * j + 1, 2 * j + 2) if k <= q < L}
            row_pos = {self._causal_position(q) for q in (2 * j + 1 - k, 2 * j + 2 - k) if 0 <= q < L - k}
            rows = self._dofs(row_pos)
            cols = self._dofs(col_pos)
            coupling = A[rows, :]
            # block lower triangularity: no coupling to positions not yet solved
            allowed = self._dofs(solved_cols | col_pos)
            mask = np.ones(g.n_dofs, dtype=bool)
            mask[allowed] = False
            if coupling[:, np.flatnonzero(mask)].nnz:
                raise RuntimeError("operator is not block lower triangular in causal order")
            block = coupling[:, cols].toarray()
            if block.shape[0] != block.shape[1]:
                raise RuntimeError("diagonal time block is not square")
            lu = sla.lu_factor(block, check_finite=True)
            pivots = np.abs(np.diag(lu[0]))
            if pivots.min() <= 1e-12 * max(pivots.max(), 1e-300):
                raise np.linalg.LinAlgError("singular leading time block; check the dt bound")
            steps.append(_Step(rows, cols, coupling, lu))
            solved_cols |= col_pos
        return steps

    def _check(self, f: np.ndarray) -> None:
        g = self.grid
        M = g.margin
        pos = g.dof_position
        if self.direction == "retarded":
            bad = pos < 2 * M
        else:
            bad = pos > g.n_positions - 1 - 2 * M
        bad |= np.isin(pos, self.dropped_positions)
        vals = f[bad]
        if np.any(vals):
            raise ValueError(f"source violates the {self.direction} margin")

    def solve(self, f: np.ndarray, check: Optional[bool] = None) -> np.ndarray:
        """Causal solution for one right-hand side or a stack of columns."""
        f = np.asarray(f)
        if f.shape[0] != self.grid.n_dofs:
            raise ValueError("source does not match the grid")
        if self.check_margins if check is None else check:
            self._check(f)
        u = np.zeros(f.shape, dtype=np.result_type(f.dtype, float))
        for st in self._steps:
            rhs = f[st.rows] - st.coupling @ u
            u[st.cols] = sla.lu_solve(st.lu, rhs, check_finite=False)
        return u

    __call__ = solve

    def dense_solve(self, f: np.ndarray) -> np.ndarray:
        """Second path: dense solve of the restricted square system."""
        g = self.grid
        pos = g.dof_position
        free = ~np.isin(pos, self.forced_positions)
        imposed = ~np.isin(pos, self.dropped_positions)
        A = self.operator.dense()[np.ix_(imposed, free)]
        u = np.zeros(np.shape(f), dtype=np.result_type(np.asarray(f).dtype, float))
        u[free] = np.linalg.solve(A, np.asarray(f)[imposed])
        return u

    def matrix(self) -> np.ndarray:
        """Dense matrix of the solver (dropped source rows map to zero columns)."""
        return self.solve(np.eye(self.grid.n_dofs), check=False)


def retarded(op: OperatorHandle, f: np.ndarray) -> np.ndarray:
    return GreenSolver(op, "retarded").solve(f)


def advanced(op: OperatorHandle, f: np.ndarray) -> np.ndarray:
    return GreenSolver(op, "advanced").solve(f)


@dataclass(eq=False)
class GreenPair:
    """Retarded and advanced solvers for one operator, with the causal propagator."""

    operator: OperatorHandle
    plus: GreenSolver = field(init=False)
    minus: GreenSolver = field(init=False)

    def __post_init__(self) -> None:
        self.plus = GreenSolver(self.operator, "retarded")
        self.minus = GreenSolver(self.operator, "advanced")

    @property
    def grid(self) -> SpacetimeGrid:
        return self.operator.source

    def check_margined(self, f: np.ndarray) -> None:
        if not self.grid.is_margined(f):
            raise ValueError("source is not supported inside the temporal margins")

    def propagate(self, f: np.ndarray, check: bool = True) -> np.ndarray:
        if check:
            self.check_margined(f)
        return self.plus.solve(f, check=False) - self.minus.solve(f, check=False)

    __call__ = propagate

    def matrix(self) -> np.ndarray:
        return self.plus.matrix() - self.minus.matrix()


def causal_propagator(op: OperatorHandle, f: np.ndarray) -> np.ndarray:
    """G f = retarded(f) - advanced(f)."""
    return GreenPair(op).propagate(f)


def proca_green(grid: SpacetimeGrid) -> GreenPair:
    return GreenPair(assemble_proca(grid))


def kg_green(grid: SpacetimeGrid) -> GreenPair:
    return GreenPair(assemble_kg(grid))


# ---------------------------------------------------------------------------
# support diagnostics


def lattice_distance(grid: SpacetimeGrid, x0: int) -> np.ndarray:
    """Chebyshev cell distance from node x0 to the base node of every dof."""
    mesh = grid.base_mesh
    coords = mesh.node_coords()
    diff = np.abs(coords - coords[x0])
    sizes = np.asarray(mesh.sizes)
    diff = np.minimum(diff, sizes - diff)
    node_dist = diff.max(axis=1)
    parts = []
    for p in range(grid.n_positions):
        parts.append(np.tile(node_dist, mesh.dim) if p % 2 == 0 else node_dist)
    return np.concatenate(parts)


def cone_leakage(
    grid: SpacetimeGrid,
    response: np.ndarray,
    source_level: int,
    x0: int,
    direction: str = "retarded",
    stencil: int = 2,
) -> float:
    """Largest |response| outside the stencil-widened lattice light cone.

    The cone after k levels has radius k + stencil cells around x0 and
    nothing is allowed on the wrong side of the source level.
    """
    pos = grid.dof_position
    level = pos / 2.0
    elapsed = level - source_level if direction == "retarded" else source_level - level
    dist = lattice_distance(grid, x0)
    outside = (elapsed < -0.5) | (dist > np.maximum(elapsed, 0) + stencil)
    return float(np.max(np.abs(response[outside]), initial=0.0))


def physical_cone_leakage(grid: SpacetimeGrid, response: np.ndarray, source_level: int, x0: int, stencil: int = 2) -> float:
    """Diagnostic only: leakage outside the continuum cone |x| ≤ c t + stencil."""
    c = 1.0 / np.sqrt(np.min(grid.metric_slices))
    dx = min(grid.base_mesh.spacing)
    pos = grid.dof_position
    elapsed = np.maximum(pos / 2.0 - source_level, 0) * grid.dt
    dist = lattice_distance(grid, x0) * dx
    outside = (pos / 2.0 < source_level - 0.5) | (dist > c * elapsed + stencil * dx)
    return float(np.max(np.abs(response[outside]), initial=0.0))
