"""Build the Møller operator between two static metrics and report every identity residual."""

from __future__ import annotations

import argparse
import time

from proca_lab.mesh import build_mesh
from proca_lab.moller import build_moller, verify_moller
from proca_lab.rng import Xorshift64Star
from proca_lab.suites import window_batteries


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nodes", type=int, default=16)
    p.add_argument("--levels", type=int, default=48)
    p.add_argument("--dt", type=float, default=0.25)
    p.add_argument("--target-metric", type=float, default=1.5)
    p.add_argument("--mass-sq", type=float, default=1.0)
    p.add_argument("--battery", type=int, default=6)
    p.add_argument("--seed", type=int, default=7)
    args = p.parse_args()

    m0 = build_mesh(1, [args.nodes], 1.0)
    m1 = build_mesh(1, [args.nodes], 1.0, args.target_metric)
    t0 = time.perf_counter()
    setup = build_moller(m0, m1, args.levels, args.dt, args.mass_sq)
    built = time.perf_counter() - t0
    full, past, future = window_batteries(setup.grid0, Xorshift64Star(args.seed), args.battery)
    res = verify_moller(setup, full, past, future)
    print(f"built in {built:.2f}s, verified in {time.perf_counter() - t0 - built:.2f}s")
    for key, value in res.items():
        print(f"{key:<28} {value:.3e}")


if __name__ == "__main__":
    main()
