"""Named verification suites driven by a scenario configuration.

Every suite returns a list of :class:`Check` records.  A check passes when
its residual is at most its threshold; positivity checks report the negated
smallest eigenvalue so that the same rule applies.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from . import cauchy as ca
from .green import GreenPair, cone_leakage, proca_green
from .mesh import SpatialMesh, build_complex, complex_residuals, mesh_from_dict
from .moller import build_moller, compose_chain, moller_minus, moller_plus, verify_moller
from .rng import Xorshift64Star
from .spacetime import (
    SpacetimeGrid,
    assemble_kg,
    build_grid,
    assemble_proca,
    assemble_q,
    lorentz_pairing,
    ultrastatic_grid,
)
from .spectral import apply_function, eigendecompose, intertwine_residual
from . import states as stt

SUITES = ("complex", "spectral", "cauchy", "green", "moller", "states")
ALPHAS = (-1.0, -0.5, 0.5, 1.0)
MASSES = (0.25, 1.0, 25.0)

DEFAULT_THRESHOLDS: dict[str, float] = {
    "complex.d_squared": 0.0,
    "complex.adjointness": 1e-12,
    "complex.laplacian_intertwining": 1e-12,
    "spectral.reconstruction": 1e-9,
    "spectral.orthonormality": 1e-10,
    "spectral.power_composition": 1e-9,
    "spectral.intertwining": 1e-9,
    "cauchy.constraint_construction": 1e-10,
    "cauchy.constraint_propagation": 1e-9,
    "cauchy.energy_equality": 1e-10,
    "cauchy.energy_conservation": 1e-10,
    "cauchy.symplectic_forms_agree": 1e-10,
    "cauchy.symplectic_time_independence": 1e-9,
    "cauchy.symplectic_rank_deficit": 0.0,
    "green.self_adjoint": 1e-10,
    "green.operator_factorization": 1e-10,
    "green.proca_retarded_inverse": 1e-8,
    "green.proca_advanced_inverse": 1e-8,
    "green.kg_retarded_inverse": 1e-8,
    "green.advanced_is_adjoint": 1e-10,
    "green.proca_equals_q_kg": 1e-9,
    "green.proca_equals_kg_q": 1e-9,
    "green.cone_leakage": 1e-10,
    "green.kernel_contains_image": 1e-8,
    "green.solve_paths_agree": 1e-9,
    "green.causal_antisymmetry": 1e-9,
    "green.symplectic_bridge": 1e-8,
    "green.image_admissible": 1e-7,
    "moller.inverse": 1e-8,
    "moller.past_identity": 1e-10,
    "moller.future_identity": 1e-10,
    "moller.intertwining": 1e-8,
    "moller.adjoint_duality": 1e-10,
    "moller.inverse_adjoint": 1e-8,
    "moller.closed_form_plus_adjoint": 1e-8,
    "moller.pushforward": 1e-7,
    "moller.adjoint_intertwining": 1e-8,
    "moller.solutions_to_solutions": 1e-7,
    "moller.chain_inverse": 1e-8,
    "moller.pullback_ccr": 1e-7,
    "moller.pullback_on_shell": 1e-7,
    "moller.pullback_gram": 1e-8,
    "states.mu_positive": 0.0,
    "states.cauchy_schwarz_violations": 0.0,
    "states.ccr": 1e-9,
    "states.on_shell": 1e-8,
    "states.sigma_routes_agree": 1e-8,
    "states.kg_covariance_difference": 1e-10,
    "states.wick_four_point": 0.0,
    "states.gram_psd": 1e-9,
    "states.fp_equivalence": 1e-8,
    "states.localization": 1e-8,
    "states.proxy_single_mode": 1e-2,
    "states.proxy_broadband": 5e-2,
}

ANCHORS: dict[str, str] = {
    "complex": "discrete Hodge complex: d∘d = 0 and δ adjoint to d",
    "spectral": "commuting fractional powers of Hodge Laplacians with d and δ",
    "cauchy": "constrained Cauchy data, energy and symplectic form",
    "green": "retarded/advanced Green operators of the Proca and Klein-Gordon operators",
    "moller": "Møller operators, their adjoints and the causal-propagator pushforward",
    "states": "quasifree two-point function, commutation relations and positive frequency",
}


class ScenarioError(ValueError):
    """Raised for malformed scenario documents."""


@dataclass(frozen=True)
class Scenario:
    name: str
    mesh: dict
    grid: dict
    moller: dict
    proxy: dict
    cauchy: dict
    mass_sq: float = 1.0
    suites: tuple[str, ...] = ("full",)
    seed: int = 1
    battery: int = 6
    tolerances: dict = field(default_factory=dict)

    @staticmethod
    def from_dict(doc: dict) -> "Scenario":
        if not isinstance(doc, dict):
            raise ScenarioError("scenario must be a JSON object")
        try:
            suites = doc.get("suites", ["full"])
            if isinstance(suites, str):
                suites = [s.strip() for s in suites.split(",")]
            sc = Scenario(
                name=str(doc["name"]),
                mesh=dict(doc["mesh"]),
                grid=dict(doc.get("grid", {"Nt": 32, "dt": 0.25})),
                moller=dict(doc.get("moller", {})),
                proxy=dict(doc.get("proxy", {})),
                cauchy=dict(doc.get("cauchy", {})),
                mass_sq=float(doc.get("mass_sq", 1.0)),
                suites=tuple(str(s) for s in suites),
                seed=int(doc.get("seed", 1)),
                battery=int(doc.get("battery", 6)),
                tolerances=dict(doc.get("tolerances", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"malformed scenario: {exc!r}") from exc
        for s in sc.suites:
            if s != "full" and s not in SUITES:
                raise ScenarioError(f"unknown suite {s!r}")
        for key in sc.tolerances:
            if key not in DEFAULT_THRESHOLDS:
                raise ScenarioError(f"unknown tolerance key {key!r}")
        if sc.mass_sq <= 0:
            raise ScenarioError("mass_sq must be positive")
        return sc

    def selected_suites(self) -> list[str]:
        if "full" in self.suites:
            return list(SUITES)
        return [s for s in SUITES if s in self.suites]


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    return Scenario.from_dict(doc)


@dataclass(frozen=True)
class Check:
    check_id: str
    paper_anchor: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.threshold)

    def as_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "paper_anchor": self.paper_anchor,
            "residual": float(f"{self.residual:.6e}"),
            "threshold": float(f"{self.threshold:.6e}"),
            "pass": self.passed,
        }


class CheckList:
    def __init__(self, suite: str, scenario: Scenario, tolerance_scale: float = 1.0) -> None:
        self.suite = suite
        self.scenario = scenario
        self.scale = tolerance_scale
        self.items: list[Check] = []

    def add(self, name: str, residual: float, anchor: Optional[str] = None) -> None:
        cid = f"{self.suite}.{name}"
        thr = self.scenario.tolerances.get(cid, DEFAULT_THRESHOLDS[cid]) * self.scale
        self.items.append(Check(cid, anchor or ANCHORS[self.suite], float(residual), float(thr)))


# ---------------------------------------------------------------------------
# helpers


def _rel(a, b) -> float:
    return float(np.linalg.norm(a) / max(np.linalg.norm(b), 1e-300))


def variable_metric_mesh(mesh: SpatialMesh, rng: Xorshift64Star) -> SpatialMesh:
    table = np.array([0.5 + 1.5 * rng.uniform() for _ in range(mesh.n_edges)])
    return mesh.with_metric(table)


def random_margined(grid: SpacetimeGrid, rng: Xorshift64Star, extra: int = 0) -> np.ndarray:
    mask = grid.margined_mask(grid.margin + extra)
    out = np.zeros(grid.n_dofs)
    out[mask] = rng.standard_normal(int(mask.sum()))
    return out


def scenario_grid(sc: Scenario, mesh: Optional[SpatialMesh] = None) -> SpacetimeGrid:
    mesh = mesh or mesh_from_dict(sc.mesh)
    g = sc.grid
    return ultrastatic_grid(mesh, int(g.get("Nt", 32)), float(g.get("dt", 0.25)), sc.mass_sq, g.get("margins"))


# ---------------------------------------------------------------------------
# suites


def suite_complex(sc: Scenario, rng: Xorshift64Star, out: CheckList) -> None:
    base = mesh_from_dict(sc.mesh)
    worst = {"d1_d0": 0.0, "adjointness": 0.0, "lap_intertwine": 0.0}
    for mesh in (base, variable_metric_mesh(base, rng)):
        res = complex_residuals(build_complex(mesh), np.random.default_rng(rng.next_u64() % (1 << 32)))
        for k in worst:
            worst[k] = max(worst[k], res[k])
    out.add("d_squared", worst["d1_d0"])
    out.add("adjointness", worst["adjointness"])
    out.add("laplacian_intertwining", worst["lap_intertwine"])


def suite_spectral(sc: Scenario, rng: Xorshift64Star, out: CheckList) -> None:
    base = mesh_from_dict(sc.mesh)
    recon = ortho = comp = inter = 0.0
    for mesh in (base, variable_metric_mesh(base, rng)):
        cx = build_complex(mesh)
        for j in range(mesh.dim):
            inter = max(inter, *(intertwine_residual(cx, j, a, m2) for a in ALPHAS for m2 in MASSES))
        for j in (0, 1):
            spec = eigendecompose(cx, j, sc.mass_sq)
            recon = max(recon, spec.residual)
            V = spec.eigenvectors
            ortho = max(ortho, float(np.abs(V.T @ (spec.weights[:, None] * V) - np.eye(V.shape[1])).max()))
            f = rng.standard_normal(cx.n_cells(j))
            half = apply_function(spec, lambda x: x**0.5, f)
            back = apply_function(spec, lambda x: x**-0.5, half)
            comp = max(comp, _rel(back - f, f))
    out.add("reconstruction", recon)
    out.add("orthonormality", ortho)
    out.add("power_composition", comp)
    out.add("intertwining", inter)


def cauchy_datum(cx, mass_sq: float, rng: Xorshift64Star, kind: str) -> ca.CauchyData:
    E = cx.n_cells(1)
    if kind == "inadmissible":
        a1 = np.zeros(E)
        a1[0] = 1.0
        z0 = np.zeros(cx.n_cells(0))
        return ca.cauchy_data(cx, mass_sq, z0, z0.copy(), a1, np.zeros(E))
    f2 = rng.standard_normal(cx.n_cells(2)) if cx.mesh.dim == 2 else None
    return ca.make_constrained(cx, mass_sq, rng.standard_normal(E), f2, rng.standard_normal(E))


def suite_cauchy(sc: Scenario, rng: Xorshift64Star, out: CheckList) -> None:
    mesh = mesh_from_dict(sc.mesh)
    cx = build_complex(mesh)
    m2 = sc.mass_sq
    spectra = ca.slice_spectra(cx, m2)
    kind = sc.cauchy.get("datum", "admissible")
    if kind not in ("admissible", "inadmissible"):
        raise ScenarioError(f"unknown cauchy datum {kind!r}")
    A = cauchy_datum(cx, m2, rng, "admissible")
    B = cauchy_datum(cx, m2, rng, "admissible")
    out.add("constraint_construction", max(A.r1, A.r2, B.r1, B.r2) / min(A.scale, B.scale))

    probe = cauchy_datum(cx, m2, rng, kind) if kind == "inadmissible" else A
    e1, e2 = ca.energy(cx, m2, probe, require_admissible=False)
    out.add("energy_equality", abs(e1 - e2) / max(abs(e1), abs(e2), 1e-300))

    times = [float(t) for t in sc.cauchy.get("times", np.linspace(0.0, 5.0, 11))]
    e0 = ca.energy(cx, m2, A)[0]
    prop = cons = 0.0
    for t in times:
        d = ca.evolve_ultrastatic(A, t, spectra)
        prop = max(prop, max(d.r1, d.r2) / d.scale)
        cons = max(cons, abs(ca.energy(cx, m2, d)[0] - e0) / e0)
    out.add("constraint_propagation", prop)
    out.add("energy_conservation", cons)

    s_ref = ca.symplectic_form(cx, A, B)
    norm = A.scale * B.scale
    out.add("symplectic_forms_agree", abs(s_ref - ca.symplectic_form_sectors(cx, A, B)) / norm)
    drift = 0.0
    for t in (0.3, 1.7):
        At = ca.evolve_ultrastatic(A, t, spectra)
        Bt = ca.evolve_ultrastatic(B, t, spectra)
        drift = max(drift, abs(ca.symplectic_form(cx, At, Bt) - s_ref) / norm)
    out.add("symplectic_time_independence", drift)

    span = ca.spanning_set(cx, m2)
    out.add("symplectic_rank_deficit", symplectic_rank_deficit(cx, span))


def symplectic_rank_deficit(cx, span: list[ca.CauchyData]) -> int:
    """dim span(C_Σ) minus the numerical rank of the σ Gram matrix on an orthonormal basis."""
    X = np.array([d.vector() for d in span]).T
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    r = int((s > 1e-9 * s[0]).sum())
    n0, n1 = cx.n_cells(0), cx.n_cells(1)
    basis = []
    for k in range(r):
        v = U[:, k]
        parts = np.split(v, [n0, 2 * n0, 2 * n0 + n1])
        basis.append(ca.CauchyData(*parts, 0.0, 0.0))
    G = np.array([[ca.symplectic_form(cx, a, b) for b in basis] for a in basis])
    sv = np.linalg.svd(G, compute_uv=False)
    return r - int((sv > 1e-9 * sv[0]).sum())


def suite_green(sc: Scenario, rng: Xorshift64Star, out: CheckList) -> None:
    grid = scenario_grid(sc)
    P, N, Q = assemble_proca(grid), assemble_kg(grid), assemble_q(grid)
    GP, GN = GreenPair(P), GreenPair(N)
    I = grid.interior_mask
    W = grid.weights_1form
    sym = 0.0
    for op in (P, N):
        WA = op.matrix.multiply(W[:, None]).toarray()
        sym = max(sym, float(np.abs(WA - WA.T).max() / np.abs(WA).max()))
    out.add("self_adjoint", sym)
    Pm, Nm, Qm = P.matrix, N.matrix, Q.matrix
    fac = max(abs(Pm @ Qm - Nm).max(), abs(Qm @ Pm - Nm).max(), abs(Nm @ Pm - Pm @ Nm).max()) / abs(Nm).max()
    out.add("operator_factorization", fac)

    battery = [random_margined(grid, rng, extra=1) for _ in range(sc.battery)]
    r_plus = r_minus = r_kg = pq = qp = ker = paths = anti = bridge = adm = 0.0
    for i, f in enumerate(battery):
        up, um = GP.plus(f), GP.minus(f)
        r_plus = max(r_plus, _rel((Pm @ up - f)[I], f))
        r_minus = max(r_minus, _rel((Pm @ um - f)[I], f))
        r_kg = max(r_kg, _rel((Nm @ GN.plus(f) - f)[I], f), _rel((Nm @ GN.minus(f) - f)[I], f))
        Gf = up - um
        pq = max(pq, _rel((Qm @ GN(f) - Gf)[I], Gf))
        qp = max(qp, _rel((GN(Qm @ f) - Gf)[I], Gf))
        Pg = Pm @ f
        ker = max(ker, _rel(GP(Pg, check=False), Pg))
        paths = max(paths, _rel(GP.plus.dense_solve(f) - up, up), _rel(GP.minus.dense_solve(f) - um, um))
        g2 = battery[(i + 1) % len(battery)]
        Gg = GP(g2)
        p_fg = lorentz_pairing(grid, f, Gg, check=False)
        p_gf = lorentz_pairing(grid, g2, Gf, check=False)
        anti = max(anti, abs(p_fg + p_gf) / max(abs(p_fg), 1e-300))
        cx = grid.half_complexes[0]
        sig = ca.symplectic_form(cx, ca.read_data(grid, Gg), ca.read_data(grid, Gf))
        bridge = max(bridge, abs(sig - p_fg) / max(abs(p_fg), 1e-300))
        for n in (grid.margin + 1, ca.central_level(grid), grid.time_steps - grid.margin - 3):
            d = ca.read_data(grid, Gf, n)
            adm = max(adm, max(d.r1, d.r2) / d.scale)
    out.add("proca_retarded_inverse", r_plus)
    out.add("proca_advanced_inverse", r_minus)
    out.add("kg_retarded_inverse", r_kg)
    Mp, Mm = GP.plus.matrix(), GP.minus.matrix()
    out.add("advanced_is_adjoint", float(np.abs(Mm - (Mp.T * W[None, :]) / W[:, None]).max() / np.abs(Mm).max()))
    out.add("proca_equals_q_kg", pq)
    out.add("proca_equals_kg_q", qp)
    out.add("cone_leakage", impulse_leakage(grid, GP, GN))
    out.add("kernel_contains_image", ker)
    out.add("solve_paths_agree", paths)
    out.add("causal_antisymmetry", anti)
    out.add("symplectic_bridge", bridge)
    out.add("image_admissible", adm)


def impulse_section(grid: SpacetimeGrid, level: Optional[int] = None, node: int = 0) -> tuple[np.ndarray, int]:
    level = grid.time_steps // 2 if level is None else level
    f = np.zeros(grid.n_dofs)
    f[grid.a1_slice(level).start + node] = 1.0
    return f, level


def impulse_leakage(grid: SpacetimeGrid, *pairs: GreenPair) -> float:
    f, level = impulse_section(grid)
    worst = 0.0
    for pair in pairs:
        worst = max(worst, cone_leakage(grid, pair.plus(f), level, 0, "retarded"))
        worst = max(worst, cone_leakage(grid, pair.minus(f), level, 0, "advanced"))
    return worst / np.linalg.norm(f)


def moller_setup_from(sc: Scenario):
    mesh0 = mesh_from_dict(sc.mesh)
    m = sc.moller
    mesh1 = mesh_from_dict(m["mesh1"]) if "mesh1" in m else mesh0.with_metric(mesh0.metric * 1.5)
    window = tuple(m["window"]) if "window" in m else None
    return build_moller(
        mesh0, mesh1, int(m.get("Nt", sc.grid.get("Nt", 32))), float(m.get("dt", sc.grid.get("dt", 0.25))),
        sc.mass_sq, window, m.get("margins"),  # type: ignore[arg-type]
    )


def window_batteries(grid: SpacetimeGrid, rng: Xorshift64Star, n: int):
    M, Nt = grid.margin, grid.time_steps
    full = [random_margined(grid, rng) for _ in range(n)]
    past_mask = grid.position_mask(2 * M, 2 * (M + 1))
    fut_mask = grid.position_mask(2 * (Nt - 2 - M), 2 * (Nt - 1 - M))

    def fill(mask):
        v = np.zeros(grid.n_dofs)
        v[mask] = rng.standard_normal(int(mask.sum()))
        return v

    return full, [fill(past_mask) for _ in range(n)], [fill(fut_mask) for _ in range(n)]


def suite_moller(sc: Scenario, rng: Xorshift64Star, out: CheckList) -> None:
    S = moller_setup_from(sc)
    full, past, fut = window_batteries(S.grid0, rng, sc.battery)
    res = verify_moller(S, full, past, fut)
    for key in (
        "inverse", "past_identity", "future_identity", "intertwining", "adjoint_duality",
        "inverse_adjoint", "closed_form_plus_adjoint", "pushforward", "adjoint_intertwining",
        "solutions_to_solutions",
    ):
        out.add(key, res[key])
    # round trip h0 -> h1 -> h0 as a two-step chain
    back_chi = build_grid(
        S.grid1.base_mesh, S.grid0.base_mesh, "smoothstep", S.grid0.time_steps, S.grid0.dt, S.grid0.margin,
        mass_sq=sc.mass_sq, window=_window_of(S), label="g_back",
    )
    gb = proca_green(back_chi)
    chain = compose_chain([S.R, moller_plus(S.grid1, back_chi, gb, S.green1), moller_minus(back_chi, S.grid0, S.green0, gb)])
    F = np.column_stack(full)
    out.add("chain_inverse", _rel(chain.inverse @ (chain.matrix @ F) - F, F))

    state = stt.QuasifreeState(S.grid0)
    pb = stt.pullback(state, S.R)
    ccr = shell = 0.0
    P1 = S.green1.operator.matrix
    for i, f in enumerate(full):
        h = full[(i + 1) % len(full)]
        w_fh = pb.two_point(f, h)
        w_hf = pb.two_point(h, f)
        target = 1j * lorentz_pairing(S.grid1, f, S.green1(h), check=False)
        ccr = max(ccr, abs(w_fh - w_hf - target) / max(abs(target), 1e-300))
        g_inner = random_margined(S.grid1, rng, extra=1)
        Pg = P1 @ g_inner
        shell = max(shell, abs(pb.two_point(f, Pg)) / max(abs(w_fh), 1e-300))
    out.add("pullback_ccr", ccr)
    out.add("pullback_on_shell", shell)
    M = pb.gram(full)
    out.add("pullback_gram", max(0.0, -float(np.linalg.eigvalsh(M).min())) / np.abs(M).max())


def _window_of(S) -> tuple[float, float]:
    g = S.grid0
    return ((g.margin + 2) * g.dt, (g.time_steps - 3 - g.margin) * g.dt)


def suite_states(sc: Scenario, rng: Xorshift64Star, out: CheckList) -> None:
    grid = scenario_grid(sc)
    st = stt.QuasifreeState(grid)
    cx = st.complex
    m2 = sc.mass_sq

    span = ca.spanning_set(cx, m2)
    X = np.array([d.vector() for d in span]).T
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    r = int((s > 1e-9 * s[0]).sum())
    n0, n1 = cx.n_cells(0), cx.n_cells(1)
    coeffs = np.linalg.lstsq(X, U[:, :r], rcond=None)[0]
    Mu = np.array([[stt.mu_form(st, a, b) for b in span] for a in span])
    red = coeffs.T @ Mu @ coeffs
    eig = np.linalg.eigvalsh(0.5 * (red + red.T))
    out.add("mu_positive", -float(eig.min()) / float(np.abs(eig).max()))

    viol = 0
    for _ in range(100):
        A = cauchy_datum(cx, m2, rng, "admissible")
        B = cauchy_datum(cx, m2, rng, "admissible")
        sig = ca.symplectic_form(cx, A, B)
        if sig * sig > 4 * stt.mu_form(st, A, A) * stt.mu_form(st, B, B) * (1 + 1e-12):
            viol += 1
    out.add("cauchy_schwarz_violations", viol)

    battery = [random_margined(grid, rng, extra=1) for _ in range(max(sc.battery, 4))]
    P = assemble_proca(grid).matrix
    ccr = shell = routes = 0.0
    for i, f in enumerate(battery):
        h = battery[(i + 1) % len(battery)]
        rep = stt.two_point(st, f, h)
        rev = stt.two_point(st, h, f)
        target = 1j * rep.sigma
        ccr = max(ccr, abs(rep.value - rev.value - target) / abs(rep.value))
        shell = max(shell, abs(stt.two_point_value(st, f, P @ h)) / abs(rep.value), abs(stt.two_point_value(st, P @ h, f)) / abs(rep.value))
        routes = max(routes, abs(stt.sigma_slice_route(st, f, h) - rep.sigma) / max(abs(rep.sigma), 1e-300))
    out.add("ccr", ccr)
    out.add("on_shell", shell)
    out.add("sigma_routes_agree", routes)

    diff = 0.0
    for j in (0, 1):
        n = cx.n_cells(j)
        A = (rng.standard_normal(n), rng.standard_normal(n))
        B = (rng.standard_normal(n), rng.standard_normal(n))
        lp = stt.kg_covariance(st, "+", j, A, B)
        lm = stt.kg_covariance(st, "-", j, A, B)
        sig = float(A[0] @ (cx.weights(j) * B[1]) - B[0] @ (cx.weights(j) * A[1]))
        diff = max(diff, abs(lp - lm - 1j * sig) / max(abs(lp), 1e-300))
    out.add("kg_covariance_difference", diff)

    four = battery[:4]
    w = {(a, b): stt.two_point_value(st, four[a], four[b]) for a in range(4) for b in range(4)}
    explicit = w[0, 1] * w[2, 3] + w[0, 2] * w[1, 3] + w[0, 3] * w[1, 2]
    wick = stt.wick_n_point(lambda f, g: w[_index(four, f), _index(four, g)], four)
    out.add("wick_four_point", abs(wick - explicit))

    gram_set = [random_margined(grid, rng, extra=1) for _ in range(10)]
    M = stt.two_point_gram(st, gram_set)
    out.add("gram_psd", max(0.0, -float(np.linalg.eigvalsh(M).min())) / np.abs(M).max())

    fp = 0.0
    for i in range(len(battery)):
        f, h = battery[i], battery[(i + 1) % len(battery)]
        scale = abs(stt.two_point_value(st, f, h))
        fp = max(fp, stt.fp_equivalence(st, f, h) / max(scale, 1e-300))
    out.add("fp_equivalence", fp)

    window = ((grid.margin + 2) * grid.dt, (grid.time_steps - 3 - grid.margin) * grid.dt)
    f, h = battery[0], battery[1]
    Tf, Th = stt.localize(st, f, window), stt.localize(st, h, window)
    base = stt.two_point_value(st, f, h)
    out.add("localization", abs(stt.two_point_value(st, Tf, Th) - base) / abs(base))

    single, broad = proxy_ratios(sc, rng)
    out.add("proxy_single_mode", single)
    out.add("proxy_broadband", broad)


def _index(items, f) -> int:
    for i, x in enumerate(items):
        if x is f:
            return i
    raise KeyError("section not in battery")


def proxy_state(sc: Scenario) -> tuple[stt.QuasifreeState, list[int]]:
    p = sc.proxy
    mesh = mesh_from_dict(p["mesh"]) if "mesh" in p else mesh_from_dict(sc.mesh)
    n_off = int(p.get("n_offsets", 64))
    Nt = int(p.get("Nt", n_off + 48))
    grid = ultrastatic_grid(mesh, Nt, float(p.get("dt", sc.grid.get("dt", 0.25))), sc.mass_sq, p.get("margins"))
    offsets = list(range(-(n_off // 2), n_off - n_off // 2))
    return stt.QuasifreeState(grid), offsets


def proxy_ratios(sc: Scenario, rng: Xorshift64Star) -> tuple[float, float]:
    st, offsets = proxy_state(sc)
    single = proxy_single_mode(sc, st, offsets)
    grid = st.grid
    mid = grid.time_steps // 2
    mask = grid.position_mask(2 * mid - 2, 2 * mid + 2)
    f = np.zeros(grid.n_dofs)
    f[mask] = rng.standard_normal(int(mask.sum()))
    broad = stt.positive_frequency_spectrum(st, f, f, offsets).negative_ratio
    return single.negative_ratio, broad


def proxy_single_mode(sc: Scenario, st: stt.QuasifreeState, offsets: list[int]) -> stt.FrequencyTable:
    target = float(sc.proxy.get("mode_eigenvalue", 2.0))
    lam = st.spectra.spec1.eigenvalues
    mode = int(np.argmin(np.abs(lam - target)))
    f = stt.single_mode_section(st, mode, st.grid.time_steps // 2)
    return stt.positive_frequency_spectrum(st, f, f, offsets)


SUITE_FUNCS: dict[str, Callable[[Scenario, Xorshift64Star, CheckList], None]] = {
    "complex": suite_complex,
    "spectral": suite_spectral,
    "cauchy": suite_cauchy,
    "green": suite_green,
    "moller": suite_moller,
    "states": suite_states,
}


def run_suite(sc: Scenario, suite: str, seed: int, tolerance_scale: float = 1.0) -> tuple[list[Check], float]:
    rng = Xorshift64Star(seed).spawn(SUITES.index(suite))
    out = CheckList(suite, sc, tolerance_scale)
    t0 = time.perf_counter()
    SUITE_FUNCS[suite](sc, rng, out)
    return out.items, time.perf_counter() - t0
