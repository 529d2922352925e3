"""Command-line runner for scenario-driven verification suites.

Exit codes: 0 when every check passes, 1 when any check fails (the report is
still written), 2 for a malformed scenario or bad arguments.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import states as stt
from .green import GreenPair
from .mesh import build_complex, mesh_from_dict
from .spacetime import assemble_proca
from .spectral import eigendecompose, export_spectrum_csv
from .suites import (
    SUITES,
    Scenario,
    ScenarioError,
    impulse_section,
    load_scenario,
    proxy_single_mode,
    proxy_state,
    run_suite,
    scenario_grid,
)

SCHEMA_VERSION = 1
SIGN_AUDIT = "antisymmetric part of the two-point function = +i (f | G_P f'), G_P = retarded - advanced"


def worker_count(n_tasks: int) -> int:
    raw = os.environ.get("PROCA_LAB_THREADS", "")
    try:
        cap = int(raw) if raw else 1
    except ValueError:
        cap = 1
    return max(1, min(cap, n_tasks))


def build_report(sc: Scenario, suites: Sequence[str], seed: int, tolerance_scale: float) -> dict:
    with ThreadPoolExecutor(max_workers=worker_count(len(suites))) as pool:
        results = list(pool.map(lambda s: run_suite(sc, s, seed, tolerance_scale), suites))
    checks = [c for items, _ in results for c in items]
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": sc.name,
        "seed": seed,
        "tolerance_scale": tolerance_scale,
        "suites": list(suites),
        "sign_convention": SIGN_AUDIT,
        "all_pass": all(c.passed for c in checks),
        "checks": [c.as_dict() for c in checks],
    }


def write_report(report: dict, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _suites_from(arg: Optional[str], sc: Scenario) -> list[str]:
    if not arg:
        return sc.selected_suites()
    names = [s.strip() for s in arg.split(",") if s.strip()]
    if "full" in names:
        return list(SUITES)
    for n in names:
        if n not in SUITES:
            raise ScenarioError(f"unknown suite {n!r}")
    return [s for s in SUITES if s in names]


def cmd_run(args, forced_suites: Optional[str] = None) -> int:
    sc = load_scenario(args.scenario)
    suites = _suites_from(forced_suites or args.suite, sc)
    seed = sc.seed if args.seed is None else args.seed
    try:
        report = build_report(sc, suites, seed, args.tolerance_scale)
    except (ValueError, KeyError, TypeError) as exc:
        raise ScenarioError(f"scenario could not be realized: {exc}") from exc
    write_report(report, args.out)
    failed = [c["check_id"] for c in report["checks"] if not c["pass"]]
    for cid in failed:
        print(f"FAIL {cid}", file=sys.stderr)
    return 0 if not failed else 1


def cmd_dump(args) -> int:
    sc = load_scenario(args.scenario)
    out = args.out
    if args.artifact == "spectrum":
        cx = build_complex(mesh_from_dict(sc.mesh))
        export_spectrum_csv(eigendecompose(cx, args.degree, sc.mass_sq), out)
    elif args.artifact == "impulse":
        grid = scenario_grid(sc)
        f, _ = impulse_section(grid)
        u = GreenPair(assemble_proca(grid)).plus(f)
        write_impulse_csv(grid, u, out)
    else:
        st, offsets = proxy_state(sc)
        proxy_single_mode(sc, st, offsets).to_csv(out)
    return 0


def write_impulse_csv(grid, u: np.ndarray, path: str) -> None:
    """Rows t, x, A0, A1: A¹ rows sit at integer levels on edge midpoints, A⁰ rows at half levels on nodes."""
    mesh = grid.base_mesh
    coords = mesh.node_coords() * np.asarray(mesh.spacing)
    dx = np.asarray(mesh.spacing)
    with open(path, "w") as fh:
        fh.write("t,x,A0,A1\n")
        for p in range(grid.n_positions):
            vals = u[grid.position_slice(p)]
            if p % 2 == 0:
                t = (p // 2) * grid.dt
                for e, v in enumerate(vals):
                    a, node = divmod(e, mesh.n_nodes)
                    x = coords[node].astype(float)
                    x[a] += 0.5 * dx[a]
                    fh.write(f"{t:.6g},{_fmt_x(x)},,{v:.12e}\n")
            else:
                t = (p // 2 + 0.5) * grid.dt
                for node, v in enumerate(vals):
                    fh.write(f"{t:.6g},{_fmt_x(coords[node])},{v / grid.dt:.12e},\n")


def _fmt_x(x) -> str:
    return ";".join(f"{float(c):.6g}" for c in x)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proca-lab", description="Discrete Proca field verification lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_suite: bool = True) -> None:
        p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--out", default=None, help="report path (stdout when omitted)")
        if with_suite:
            p.add_argument("--suite", default=None, help="comma-separated suites or 'full'")
        p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed for random batteries")
        p.add_argument("--tolerance-scale", type=float, default=1.0, help="multiplier on every threshold")

    common(sub.add_parser("run", help="run verification suites"))
    common(sub.add_parser("moller-verify", help="run the Møller suite"), with_suite=False)
    common(sub.add_parser("state-verify", help="run the state suite"), with_suite=False)
    dump = sub.add_parser("dump", help="write a CSV artifact")
    dump.add_argument("artifact", choices=["spectrum", "impulse", "frequency"])
    dump.add_argument("--scenario", required=True)
    dump.add_argument("--out", required=True)
    dump.add_argument("--degree", type=int, default=0, choices=[0, 1])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    if getattr(args, "tolerance_scale", 1.0) <= 0:
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return 2
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "moller-verify":
            return cmd_run(args, "moller")
        if args.command == "state-verify":
            return cmd_run(args, "states")
        return cmd_dump(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
