"""Constrained Cauchy data for the Proca field on a spatial slice.

Cauchy data is the quadruple ``(a0, pi0, a1, pi1)`` of 0- and 1-forms.  It is
admissible when the two constraints hold::

    pi0 + δ⁽¹⁾ a1 = 0
    (Δ⁽⁰⁾ + m²) a0 - δ⁽¹⁾ pi1 = 0

Evolution on an ultrastatic slice is done exactly in the spectral basis, so
conservation checks probe the algebra rather than a time integrator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .mesh import HodgeComplex, inner_product
from .spacetime import SpacetimeGrid
from .spectral import Spectrum, eigendecompose

ADMISSIBLE_RTOL = 1e-9
ETA = {0: -1.0, 1: 1.0}


@dataclass(frozen=True)
class CauchyData:
    a0: np.ndarray
    pi0: np.ndarray
    a1: np.ndarray
    pi1: np.ndarray
    r1: float
    r2: float

    @property
    def scale(self) -> float:
        return max(*(float(np.linalg.norm(x)) for x in self.components()), 1e-300)

    @property
    def admissible(self) -> bool:
        return max(self.r1, self.r2) < ADMISSIBLE_RTOL * self.scale

    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.a0, self.pi0, self.a1, self.pi1

    def sector(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """(a, π) of degree j."""
        return (self.a0, self.pi0) if j == 0 else (self.a1, self.pi1)

    def vector(self) -> np.ndarray:
        return np.concatenate(self.components())

    def to_json(self) -> str:
        def enc(x: np.ndarray) -> list:
            return [float(v) for v in np.real(x)]

        return json.dumps(
            {
                "a0": enc(self.a0),
                "pi0": enc(self.pi0),
                "a1": enc(self.a1),
                "pi1": enc(self.pi1),
                "residuals": {"r1": self.r1, "r2": self.r2},
            }
        )


def constraint_residuals(cx: HodgeComplex, mass_sq: float, a0, pi0, a1, pi1) -> tuple[float, float]:
    r1 = np.linalg.norm(pi0 + cx.delta1 @ a1)
    r2 = np.linalg.norm((cx.lap0 @ a0 + mass_sq * a0) - cx.delta1 @ pi1)
    return float(r1), float(r2)


def cauchy_data(cx: HodgeComplex, mass_sq: float, a0, pi0, a1, pi1) -> CauchyData:
    arrays = [np.asarray(x) for x in (a0, pi0, a1, pi1)]
    sizes = (cx.n_cells(0), cx.n_cells(0), cx.n_cells(1), cx.n_cells(1))
    for x, n in zip(arrays, sizes):
        if x.shape != (n,):
            raise ValueError("Cauchy data components do not match the mesh")
    return CauchyData(*arrays, *constraint_residuals(cx, mass_sq, *arrays))


def make_constrained(
    cx: HodgeComplex,
    mass_sq: float,
    f1: np.ndarray,
    f2: Optional[np.ndarray],
    a1: np.ndarray,
) -> CauchyData:
    """Admissible data generated from a free 1-form f1, 2-form f2 and vector potential a1."""
    if np.shape(f1) != (cx.n_cells(1),) or np.shape(a1) != (cx.n_cells(1),):
        raise ValueError("f1 and a1 must be 1-forms on the complex's mesh")
    if cx.mesh.dim == 1:
        if f2 is not None and np.size(f2):
            raise ValueError("no 2-forms on a one-dimensional mesh")
        f2_term = np.zeros(cx.n_cells(1))
    else:
        if f2 is None:
            f2 = np.zeros(cx.n_cells(2))
        if np.shape(f2) != (cx.n_cells(2),):
            raise ValueError("f2 must be a 2-form on the complex's mesh")
        f2_term = cx.delta2 @ f2
    a0 = cx.delta1 @ f1
    pi1 = cx.lap1 @ f1 + mass_sq * f1 + f2_term
    pi0 = -(cx.delta1 @ a1)
    return cauchy_data(cx, mass_sq, a0, pi0, np.asarray(a1, dtype=float).copy(), pi1)


def spanning_set(cx: HodgeComplex, mass_sq: float) -> list[CauchyData]:
    """Images of make_constrained over the canonical basis of its inputs."""
    E, F = cx.n_cells(1), cx.n_cells(2)
    out = []
    zeros_e = np.zeros(E)
    zeros_f = np.zeros(F) if cx.mesh.dim == 2 else None
    for i in range(E):
        e = np.zeros(E)
        e[i] = 1.0
        out.append(make_constrained(cx, mass_sq, e, zeros_f, zeros_e))
    for i in range(F):
        f = np.zeros(F)
        f[i] = 1.0
        out.append(make_constrained(cx, mass_sq, zeros_e, f, zeros_e))
    for i in range(E):
        e = np.zeros(E)
        e[i] = 1.0
        out.append(make_constrained(cx, mass_sq, zeros_e, zeros_f, e))
    return out


@dataclass(frozen=True)
class SlicePair:
    """Spectra of Δ⁽⁰⁾ and Δ⁽¹⁾ on one slice, with the complex they came from."""

    complex: HodgeComplex
    spec0: Spectrum
    spec1: Spectrum

    @property
    def mass_sq(self) -> float:
        return self.spec0.mass_sq

    def spectrum(self, j: int) -> Spectrum:
        return self.spec0 if j == 0 else self.spec1


def slice_spectra(cx: HodgeComplex, mass_sq: float) -> SlicePair:
    return SlicePair(cx, eigendecompose(cx, 0, mass_sq), eigendecompose(cx, 1, mass_sq))


def evolve_ultrastatic(data: CauchyData, t: float, spectra: SlicePair, require_admissible: bool = True) -> CauchyData:
    """Exact flow of the two decoupled Klein-Gordon sectors for time t."""
    if require_admissible and not data.admissible:
        raise ValueError("Cauchy data violates the constraints")
    out = []
    for j in (0, 1):
        sp_j = spectra.spectrum(j)
        a, pi = data.sector(j)
        cos = sp_j.apply(lambda x: np.cos(t * np.sqrt(x)), a)
        sinc = sp_j.apply(lambda x: np.sin(t * np.sqrt(x)) / np.sqrt(x), pi)
        a_t = cos + sinc
        pi_t = -sp_j.apply(lambda x: np.sqrt(x) * np.sin(t * np.sqrt(x)), a) + sp_j.apply(
            lambda x: np.cos(t * np.sqrt(x)), pi
        )
        out += [a_t, pi_t]
    return cauchy_data(spectra.complex, spectra.mass_sq, out[0], out[1], out[2], out[3])


def symplectic_form(cx: HodgeComplex, A: CauchyData, B: CauchyData) -> float:
    """∫ h^♯(a¹, π¹' - d a⁰') - h^♯(a¹', π¹ - d a⁰)."""
    _same_mesh(cx, A, B)
    return inner_product(cx, 1, A.a1, B.pi1 - cx.d0 @ B.a0) - inner_product(cx, 1, B.a1, A.pi1 - cx.d0 @ A.a0)


def symplectic_form_sectors(cx: HodgeComplex, A: CauchyData, B: CauchyData) -> float:
    """Σ_j η_j (⟨a_j, π_j'⟩ - ⟨a_j', π_j⟩) with η₀ = -1, η₁ = 1."""
    _same_mesh(cx, A, B)
    total = 0.0
    for j in (0, 1):
        a, pi = A.sector(j)
        a2, pi2 = B.sector(j)
        total += ETA[j] * (inner_product(cx, j, a, pi2) - inner_product(cx, j, a2, pi))
    return total


def energy(cx: HodgeComplex, mass_sq: float, data: CauchyData, require_admissible: bool = True) -> tuple[float, float]:
    """(energy-density form, difference of the two Klein-Gordon energies)."""
    if require_admissible and not data.admissible:
        raise ValueError("the two energy forms only agree on admissible data")
    e = data.pi1 - cx.d0 @ data.a0
    density = inner_product(cx, 1, e, e) + mass_sq * (
        inner_product(cx, 1, data.a1, data.a1) + inner_product(cx, 0, data.a0, data.a0)
    )
    if cx.mesh.dim == 2:
        b = cx.d1 @ data.a1
        density += inner_product(cx, 2, b, b)
    spectral = 0.0
    for j in (0, 1):
        a, pi = data.sector(j)
        spectral += ETA[j] * (inner_product(cx, j, pi, pi) + inner_product(cx, j, a, cx.laplacian(j) @ a + mass_sq * a))
    return 0.5 * float(density), 0.5 * float(spectral)


def _same_mesh(cx: HodgeComplex, A: CauchyData, B: CauchyData) -> None:
    n0, n1 = cx.n_cells(0), cx.n_cells(1)
    for d in (A, B):
        if d.a0.shape != (n0,) or d.a1.shape != (n1,):
            raise ValueError("Cauchy data live on a different mesh")


# ---------------------------------------------------------------------------
# read-off from spacetime sections


def central_level(grid: SpacetimeGrid) -> int:
    """Level n such that data is read at the half level n+½ in the middle of the window."""
    return (grid.time_steps - 2) // 2


def read_data(grid: SpacetimeGrid, section: np.ndarray, level: Optional[int] = None) -> CauchyData:
    """Cauchy data of a spacetime section at the half level n+½.

    a⁰ and π⁰ come from A⁰ at n+½ and its central difference over n-½..n+3/2;
    a¹ and π¹ are the average and forward difference of A¹ over levels n, n+1.
    For discrete Proca solutions both constraints then hold exactly.
    """
    n = central_level(grid) if level is None else int(level)
    if not 1 <= n <= grid.time_steps - 3:
        raise ValueError("read-off level needs neighbours on both sides")
    dt = grid.dt
    s = np.asarray(section)
    a0 = s[grid.a0_slice(n)] / dt
    pi0 = (s[grid.a0_slice(n + 1)] - s[grid.a0_slice(n - 1)]) / (2 * dt * dt)
    a1 = 0.5 * (s[grid.a1_slice(n)] + s[grid.a1_slice(n + 1)])
    pi1 = (s[grid.a1_slice(n + 1)] - s[grid.a1_slice(n)]) / dt
    cx = grid.half_complexes[n]
    return cauchy_data(cx, grid.mass_sq, a0, pi0, a1, pi1)


def energy_trace(cx: HodgeComplex, data: CauchyData, spectra: SlicePair, times, path: Union[str, Path, None] = None) -> list[tuple[float, float, float, float, float]]:
    """Rows (t, E_density, E_spectral, r1, r2) along exact evolution."""
    rows = []
    for t in times:
        d = evolve_ultrastatic(data, float(t), spectra, require_admissible=False)
        e1, e2 = energy(cx, spectra.mass_sq, d, require_admissible=False)
        rows.append((float(t), e1, e2, d.r1, d.r2))
    if path is not None:
        with open(path, "w") as fh:
            fh.write("t,E_density,E_spectral,r1,r2\n")
            for r in rows:
                fh.write(",".join(f"{v:.12e}" for v in r) + "\n")
    return rows
