"""Retarded Proca response to a unit impulse, with the lattice-cone leakage."""

from __future__ import annotations

import argparse

import numpy as np

from proca_lab.green import cone_leakage, physical_cone_leakage, proca_green
from proca_lab.mesh import build_mesh
from proca_lab.spacetime import ultrastatic_grid
from proca_lab.suites import impulse_section


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nodes", type=int, default=16)
    p.add_argument("--levels", type=int, default=48)
    p.add_argument("--dt", type=float, default=0.25)
    p.add_argument("--metric", type=float, default=1.0)
    p.add_argument("--mass-sq", type=float, default=1.0)
    args = p.parse_args()

    grid = ultrastatic_grid(build_mesh(1, [args.nodes], 1.0, args.metric), args.levels, args.dt, args.mass_sq)
    f, level = impulse_section(grid)
    u = proca_green(grid).plus(f)
    print(f"impulse at level {level}, node 0")
    print(f"lattice-cone leakage    {cone_leakage(grid, u, level, 0):.3e}")
    print(f"continuum-cone leakage  {physical_cone_leakage(grid, u, level, 0):.3e} (diagnostic)")
    for n in range(level, min(level + 8, grid.time_steps)):
        row = u[grid.a1_slice(n)]
        support = np.flatnonzero(np.abs(row) > 1e-14)
        print(f"level {n:3d}: |A1|max={np.abs(row).max():.3e} support={support.tolist()}")


if __name__ == "__main__":
    main()
