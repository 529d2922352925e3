"""Quasifree states of the Proca field on an ultrastatic grid.

The two-point function of a test-section pair is

    ω₂(f, f') = μ(D G f, D G f') + (i/2) (f | G f')

where ``G`` is the Proca causal propagator, ``D`` reads Cauchy data off a
solution at the central half level and ``μ`` is the ground-state covariance
built from ``H_j = (Δ⁽ʲ⁾ + m²)^{1/2}`` with sector signs η₀ = -1, η₁ = +1.
With this convention the antisymmetric part of ω₂ is i (f | G f') and the
slice symplectic form satisfies (f | G f') = σ(D G f', D G f).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .cauchy import ETA, CauchyData, SlicePair, read_data, slice_spectra, symplectic_form
from .green import GreenPair, kg_green, proca_green
from .mesh import inner_product
from .spacetime import SpacetimeGrid, assemble_proca, assemble_q, lorentz_pairing, smoothstep

TwoPointFn = Callable[[np.ndarray, np.ndarray], complex]


@dataclass(frozen=True)
class TwoPointReport:
    value: complex
    mu: float
    sigma: float
    provenance: str

    def __post_init__(self) -> None:
        if abs(self.value - (self.mu + 0.5j * self.sigma)) > 1e-12 * max(abs(self.value), 1.0):
            raise ValueError("two-point value must equal mu + (i/2) sigma")


@dataclass(eq=False)
class QuasifreeState:
    """Ground-state-like quasifree state on an ultrastatic grid."""

    grid: SpacetimeGrid
    level: Optional[int] = None
    spectra: SlicePair = field(init=False)
    green: GreenPair = field(init=False)
    kg: GreenPair = field(init=False)

    def __post_init__(self) -> None:
        if not self.grid.is_ultrastatic:
            raise ValueError("states are built on ultrastatic grids only")
        self.spectra = slice_spectra(self.grid.level_complexes[0], self.grid.mass_sq)
        self.green = proca_green(self.grid)
        self.kg = kg_green(self.grid)
        self._h = {j: self.spectra.spectrum(j).function_matrix(np.sqrt) for j in (0, 1)}
        self._hinv = {j: self.spectra.spectrum(j).function_matrix(lambda x: x**-0.5) for j in (0, 1)}

    @property
    def complex(self):
        return self.spectra.complex

    def data(self, solution: np.ndarray) -> CauchyData:
        return read_data(self.grid, solution, self.level)

    # -- covariances on Cauchy data ------------------------------------------
    def sector_covariance(self, j: int, a, pi, a2, pi2) -> complex:
        """½[⟨π̄, H⁻¹π'⟩ + ⟨ā, H a'⟩] (sesquilinear in complex data)."""
        cx = self.complex
        return 0.5 * (
            inner_product(cx, j, np.conj(pi), self._hinv[j] @ pi2)
            + inner_product(cx, j, np.conj(a), self._h[j] @ a2)
        )


def mu_form(state: QuasifreeState, A: CauchyData, B: CauchyData, require_admissible: bool = True) -> float:
    """Σ_j η_j ½[⟨π_j, H_j⁻¹ π_j'⟩ + ⟨a_j, H_j a_j'⟩]."""
    if require_admissible and not (A.admissible and B.admissible):
        raise ValueError("μ is only positive on admissible data")
    total = 0.0
    for j in (0, 1):
        a, pi = A.sector(j)
        a2, pi2 = B.sector(j)
        total += ETA[j] * state.sector_covariance(j, a, pi, a2, pi2)
    return float(np.real(total))


def kg_covariance(state: QuasifreeState, sign: str, j: int, A: tuple, B: tuple) -> complex:
    """λ^± on unconstrained data (a, π) of degree j; λ⁺ - λ⁻ = iσ⁽ʲ⁾."""
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    a, pi = (np.asarray(x) for x in A)
    a2, pi2 = (np.asarray(x) for x in B)
    n = state.complex.n_cells(j)
    if any(x.shape != (n,) for x in (a, pi, a2, pi2)):
        raise ValueError(f"data must be degree-{j} forms")
    cx = state.complex
    sym = state.sector_covariance(j, a, pi, a2, pi2)
    sigma = inner_product(cx, j, np.conj(a), pi2) - inner_product(cx, j, a2, np.conj(pi))
    return sym + (0.5j if sign == "+" else -0.5j) * sigma


def two_point(state: QuasifreeState, f: np.ndarray, f2: np.ndarray) -> TwoPointReport:
    """ω₂(f, f') for margined test sections."""
    Gf = state.green(f)
    Gf2 = state.green(f2)
    mu = mu_form(state, state.data(Gf), state.data(Gf2), require_admissible=False)
    sigma = float(lorentz_pairing(state.grid, f, Gf2, check=False))
    return TwoPointReport(mu + 0.5j * sigma, mu, sigma, "mu on central-slice data + pairing route")


def two_point_value(state: QuasifreeState, f: np.ndarray, f2: np.ndarray) -> complex:
    return two_point(state, f, f2).value


def sigma_slice_route(state: QuasifreeState, f: np.ndarray, f2: np.ndarray) -> float:
    """Cross-check of (f | G f') from slice data: σ(D G f', D G f)."""
    return symplectic_form(state.complex, state.data(state.green(f2)), state.data(state.green(f)))


def two_point_gram(state: QuasifreeState, sections: Sequence[np.ndarray]) -> np.ndarray:
    """Hermitian matrix of ω₂ over a battery, from one solve per section."""
    sols = [state.green(f) for f in sections]
    data = [state.data(u) for u in sols]
    n = len(sections)
    M = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            mu = mu_form(state, data[a], data[b], require_admissible=False)
            sigma = lorentz_pairing(state.grid, sections[a], sols[b], check=False)
            M[a, b] = mu + 0.5j * sigma
    return M


def fp_equivalence(state: QuasifreeState, f: np.ndarray, f2: np.ndarray) -> float:
    """|ω₂(f, f') - W(f, Q f')| with W assembled from Klein-Gordon covariances.

    W(f, h) = Λ⁺(D G_N h, D G_N f) with Λ⁺ = λ⁺ of the vector sector minus λ⁺
    of the scalar sector, the data read off Klein-Gordon solutions.
    """
    Q = assemble_q(state.grid).matrix
    X = state.data(state.kg(Q @ f2, check=False))
    Y = state.data(state.kg(f))
    W = 0.0j
    for j in (0, 1):
        W += ETA[j] * kg_covariance(state, "+", j, X.sector(j), Y.sector(j))
    return float(abs(two_point_value(state, f, f2) - W))


# ---------------------------------------------------------------------------
# n-point functions


def perfect_matchings(items: Sequence[int]) -> list[list[tuple[int, int]]]:
    """All partitions of an even-length index list into ordered pairs."""
    items = list(items)
    if not items:
        return [[]]
    if len(items) % 2:
        return []
    first, rest = items[0], items[1:]
    out = []
    for k, partner in enumerate(rest):
        remaining = rest[:k] + rest[k + 1 :]
        for m in perfect_matchings(remaining):
            out.append([(first, partner)] + m)
    return out


def wick_n_point(omega2: TwoPointFn | QuasifreeState, sections: Sequence[np.ndarray]) -> complex:
    """n-point function of a quasifree state: sum over pairings of ω₂ products."""
    if isinstance(omega2, QuasifreeState):
        st = omega2
        omega2 = lambda f, g: two_point_value(st, f, g)  # noqa: E731
    n = len(sections)
    if n % 2:
        return 0.0j
    cache: dict[tuple[int, int], complex] = {}
    total = 0.0j
    for matching in perfect_matchings(range(n)):
        term = 1.0 + 0.0j
        for i, j in matching:
            if (i, j) not in cache:
                cache[(i, j)] = omega2(sections[i], sections[j])
            term *= cache[(i, j)]
        total += term
    return total


# ---------------------------------------------------------------------------
# pullback and localization


@dataclass(eq=False)
class PulledBackState:
    """ω'₂(f, h) = ω₂(R† f, R† h) for sections of the target grid."""

    state: QuasifreeState
    adjoint_matrix: np.ndarray
    target: SpacetimeGrid

    def two_point(self, f: np.ndarray, h: np.ndarray) -> complex:
        g = self.state.grid
        return two_point_value(self.state, _clean(g, self.adjoint_matrix @ f), _clean(g, self.adjoint_matrix @ h))

    def gram(self, sections: Sequence[np.ndarray]) -> np.ndarray:
        g = self.state.grid
        return two_point_gram(self.state, [_clean(g, self.adjoint_matrix @ f) for f in sections])


def _clean(grid: SpacetimeGrid, f: np.ndarray) -> np.ndarray:
    """Zero out roundoff outside the margins so the solver's support check applies."""
    out = np.array(f, copy=True)
    outside = ~grid.margined_mask()
    if np.any(np.abs(out[outside]) > 1e-9 * max(np.abs(out).max(), 1e-300)):
        raise ValueError("pulled-back section is not supported inside the margins")
    out[outside] = 0.0
    return out


def pullback(state: QuasifreeState, moller) -> PulledBackState:
    """Pull a state on g back along a Møller operator R: g -> g'."""
    if moller.source is not state.grid and not moller.source.same_layout(state.grid):
        raise ValueError("the Møller operator does not start on the state's grid")
    return PulledBackState(state, moller.adjoint_matrix(), moller.target)


def time_cutoff(grid: SpacetimeGrid, window: tuple[float, float]) -> np.ndarray:
    """Per-dof smooth step in time: 0 before the window, 1 after it."""
    t_a, t_b = window
    lo = grid.margin * grid.dt
    hi = (grid.time_steps - 1 - grid.margin) * grid.dt
    if not (lo <= t_a < t_b <= hi):
        raise ValueError("localization window must lie strictly inside the margins")
    t = grid.dof_position / 2.0 * grid.dt
    return smoothstep((t - t_a) / (t_b - t_a))


def localize(state: QuasifreeState, f: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    """T f = P(χ G f); T f - f lies in the image of P.

    P G f vanishes wherever χ is constant, so T f is supported in the window
    widened by one level on each side.  Values outside that band are pure
    roundoff and are set to zero.
    """
    grid = state.grid
    chi = time_cutoff(grid, window)
    P = assemble_proca(grid).matrix
    out = P @ (chi * state.green(f))
    lo = 2 * int(np.floor(window[0] / grid.dt + 1e-9)) - 2
    hi = 2 * int(np.ceil(window[1] / grid.dt - 1e-9)) + 2
    out[~grid.position_mask(lo, hi)] = 0.0
    return out


# ---------------------------------------------------------------------------
# positive-frequency proxy


@dataclass(frozen=True)
class FrequencyTable:
    frequencies: np.ndarray
    power: np.ndarray
    negative_ratio: float
    peak_frequency: float

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("frequency,magnitude\n")
            for nu, p in zip(self.frequencies, self.power):
                fh.write(f"{nu:.12e},{np.sqrt(p):.12e}\n")


def lag_correlation(state: QuasifreeState, f: np.ndarray, f2: np.ndarray, offsets: Sequence[int]) -> np.ndarray:
    """c(τ) = ω₂(f_τ, f') with f_τ the section f moved τ levels later."""
    grid = state.grid
    for s in (min(offsets), max(offsets)):
        shifted = grid.time_shift(f, s)
        if not grid.is_margined(shifted):
            raise ValueError("time offsets move the section into the margins")
    Gf2 = state.green(f2)
    B = state.data(Gf2)
    out = []
    for s in offsets:
        fs = grid.time_shift(f, s)
        Gfs = state.green(fs)
        mu = mu_form(state, state.data(Gfs), B, require_admissible=False)
        sigma = lorentz_pairing(grid, fs, Gf2, check=False)
        out.append(mu + 0.5j * sigma)
    return np.array(out)


def positive_frequency_spectrum(
    state: QuasifreeState,
    f: np.ndarray,
    f2: np.ndarray,
    time_offsets: Sequence[int],
    pad: int = 16,
) -> FrequencyTable:
    """Hann-windowed transform ĉ(ν) = Σ w(τ) c(τ) e^{-iντ} and its sign split.

    Positive ν carries the positive-frequency content.  The Nyquist bin is
    counted on the negative side.
    """
    offsets = np.asarray(time_offsets, dtype=int)
    c = lag_correlation(state, f, f2, offsets)
    n = offsets.size
    w = np.hanning(n + 2)[1:-1]
    dt = state.grid.dt
    n_fft = pad * n
    spec = np.fft.fft(w * c, n_fft) * np.exp(-1j * np.fft.fftfreq(n_fft) * 2 * np.pi * offsets[0])
    nu = np.fft.fftfreq(n_fft, d=dt) * 2 * np.pi
    power = np.abs(spec) ** 2
    order = np.argsort(nu, kind="stable")
    nu, power = nu[order], power[order]
    negative = power[nu < 0].sum()
    total = max(power.sum(), 1e-300)
    return FrequencyTable(nu, power, float(negative / total), float(nu[np.argmax(power)]))


def single_mode_section(state: QuasifreeState, mode: int, level: int, width: int = 2) -> np.ndarray:
    """Test section A¹ = g(t) e_k built from one W-orthonormal Δ⁽¹⁾ eigenvector."""
    grid = state.grid
    e = state.spectra.spec1.eigenvectors[:, mode]
    f = np.zeros(grid.n_dofs)
    for s in range(-width, width + 1):
        f[grid.a1_slice(level + s)] = np.cos(0.5 * np.pi * s / (width + 1)) ** 2 * e
    return f


def combinations_count(n: int) -> int:
    """Number of perfect matchings of n items, (n-1)!!."""
    if n % 2:
        return 0
    return int(np.prod(np.arange(n - 1, 0, -2))) if n else 1

