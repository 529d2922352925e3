"""Spectral calculus for the weighted-symmetric Hodge Laplacians.

``Δ`` is self-adjoint for the weighted pairing ``<f, g> = f^T W g`` but not
symmetric as a plain matrix.  The similarity transform ``W^{1/2} Δ W^{-1/2}``
is symmetric, so a dense ``eigh`` gives an orthonormal basis ``U``; the
columns of ``V = W^{-1/2} U`` are then W-orthonormal eigenvectors of ``Δ``
and any real function acts as ``V diag(fn(λ + m²)) V^T W``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .mesh import HodgeComplex

CLAMP_RELATIVE = 1e-12


@dataclass(frozen=True)
class Spectrum:
    degree: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass_sq: float
    weights: np.ndarray
    residual: float = 0.0

    @property
    def shifted(self) -> np.ndarray:
        """Eigenvalues of Δ + m²."""
        return self.eigenvalues + self.mass_sq

    def function_matrix(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Dense matrix of fn(Δ + m²)."""
        vals = _checked_values(fn, self.shifted)
        V = self.eigenvectors
        return (V * vals) @ (V.T * self.weights)

    def apply(self, fn: Callable[[np.ndarray], np.ndarray], f: np.ndarray) -> np.ndarray:
        return apply_function(self, fn, f)

    def power(self, alpha: float, f: np.ndarray) -> np.ndarray:
        return apply_function(self, lambda x: x**alpha, f)


def _checked_values(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    if np.any(x <= 0):
        raise ValueError("Δ + m² must be strictly positive on the spectrum")
    with np.errstate(all="ignore"):
        vals = np.asarray(fn(x), dtype=float)
    if vals.shape != x.shape or not np.all(np.isfinite(vals)):
        raise ValueError("function is undefined or not finite on the spectrum")
    return vals


def _decompose(weights: np.ndarray, lap: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Eigenpairs of a W-symmetric matrix, with the reconstruction residual."""
    sw = np.sqrt(weights)
    sym = (sw[:, None] * lap) / sw[None, :]
    sym = 0.5 * (sym + sym.T)
    lam, U = np.linalg.eigh(sym)
    top = max(float(np.max(np.abs(lam))), 0.0) if lam.size else 0.0
    lam = np.where(lam < CLAMP_RELATIVE * top, 0.0, lam)
    V = U / sw[:, None]
    recon = (V * lam) @ (V.T * weights)
    norm = max(np.linalg.norm(lap), 1e-300)
    return lam, V, float(np.linalg.norm(recon - lap) / norm)


def spectrum_of_degree(cx: HodgeComplex, k: int, mass_sq: float) -> Spectrum:
    """Spectrum of Δ⁽ᵏ⁾ for any degree the complex carries (used internally for k=2)."""
    if mass_sq <= 0:
        raise ValueError("mass_sq must be positive")
    if cx.n_cells(k) == 0:
        raise ValueError(f"the complex has no degree-{k} cells")
    w = cx.weights(k)
    lam, V, res = _decompose(w, cx.laplacian(k).toarray())
    if res > 1e-9:
        raise np.linalg.LinAlgError(f"eigendecomposition residual {res:.3e} exceeds 1e-9")
    return Spectrum(k, lam, V, float(mass_sq), w, res)


def eigendecompose(cx: HodgeComplex, j: int, mass_sq: float) -> Spectrum:
    """Full spectrum of Δ⁽ʲ⁾ (j = 0 or 1) with W-orthonormal eigenvectors."""
    if j not in (0, 1):
        raise ValueError("only degrees 0 and 1 are exposed")
    return spectrum_of_degree(cx, j, mass_sq)


def apply_function(spectrum: Spectrum, fn: Callable[[np.ndarray], np.ndarray], f: np.ndarray) -> np.ndarray:
    """Return fn(Δ + m²) f computed in the eigenbasis."""
    f = np.asarray(f)
    n = spectrum.weights.size
    if f.shape[0] != n:
        raise ValueError(f"degree-{spectrum.degree} field must have length {n}")
    vals = _checked_values(fn, spectrum.shifted)
    V = spectrum.eigenvectors
    coeff = V.T @ (spectrum.weights[:, None] * f if f.ndim == 2 else spectrum.weights * f)
    if f.ndim == 2:
        return V @ (vals[:, None] * coeff)
    return V @ (vals * coeff)


def intertwine_residual(
    cx: HodgeComplex,
    j: int,
    alpha: float,
    mass_sq: float,
    direction: str = "both",
) -> float:
    """Relative failure of fractional powers to commute with d⁽ʲ⁾ (and δ⁽ʲ⁺¹⁾).

    ``direction`` is ``"d"``, ``"delta"`` or ``"both"`` (maximum of the two).
    """
    d = (cx.d0, cx.d1)[j].toarray() if j in (0, 1) else None
    if d is None or d.shape[0] == 0:
        raise ValueError(f"no exterior derivative out of degree {j}")
    delta = (cx.delta1, cx.delta2)[j].toarray()
    low = spectrum_of_degree(cx, j, mass_sq).function_matrix(lambda x: x**alpha)
    high = spectrum_of_degree(cx, j + 1, mass_sq).function_matrix(lambda x: x**alpha)
    out = []
    if direction in ("d", "both"):
        lhs = high @ d
        out.append(np.linalg.norm(lhs - d @ low) / max(np.linalg.norm(lhs), 1e-300))
    if direction in ("delta", "both"):
        lhs = low @ delta
        out.append(np.linalg.norm(lhs - delta @ high) / max(np.linalg.norm(lhs), 1e-300))
    if not out:
        raise ValueError(f"unknown direction {direction!r}")
    return float(max(out))


def export_spectrum_csv(spectrum: Spectrum, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        fh.write("index,eigenvalue\n")
        for i, lam in enumerate(spectrum.eigenvalues):
            fh.write(f"{i},{lam:.17g}\n")
