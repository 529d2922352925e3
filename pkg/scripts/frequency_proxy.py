"""Positive-frequency content of lag correlations for a single mode and a broadband section."""

from __future__ import annotations

import argparse

import numpy as np

from proca_lab import bundled_scenario
from proca_lab.rng import Xorshift64Star
from proca_lab.states import positive_frequency_spectrum
from proca_lab.suites import load_scenario, proxy_single_mode, proxy_state


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--scenario", default=str(bundled_scenario("flat_1p1_small.json")))
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--csv", default=None, help="write the single-mode spectrum here")
    args = p.parse_args()

    sc = load_scenario(args.scenario)
    state, offsets = proxy_state(sc)
    single = proxy_single_mode(sc, state, offsets)
    grid = state.grid
    mid = grid.time_steps // 2
    mask = grid.position_mask(2 * mid - 2, 2 * mid + 2)
    f = np.zeros(grid.n_dofs)
    f[mask] = Xorshift64Star(args.seed).standard_normal(int(mask.sum()))
    broad = positive_frequency_spectrum(state, f, f, offsets)
    print(f"single mode: negative ratio {single.negative_ratio:.3e}, peak at ν = {single.peak_frequency:.4f}")
    print(f"broadband:   negative ratio {broad.negative_ratio:.3e}, peak at ν = {broad.peak_frequency:.4f}")
    if args.csv:
        single.to_csv(args.csv)


if __name__ == "__main__":
    main()
