"""Small-data quintic derivative run: Picard contraction, H^1 growth ladder and scattering.

    python3 scripts/small_data_run.py --out results/small_data
"""
import argparse
import json
import math
from pathlib import Path

import numpy as np

from dnls.grid import FrequencyGrid, gaussian_packet
from dnls.nonlinearity import PolynomialNonlinearity
from dnls.propagator import Propagator, TimeGrid, free_evolve
from dnls.records import dumps
from dnls.solver import extract_scattering_state, picard_solve, small_data_global_run, split_step_evolve


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/small_data")
    ap.add_argument("--points", type=int, default=1024)
    ap.add_argument("--half-length", type=float, default=64 * math.pi)
    ap.add_argument("--t-end", type=float, default=50.0)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--delta", type=float, default=1e-3)
    ap.add_argument("--ladder", type=float, nargs="*", default=[0.0, 1e-3, 1e-2, 0.1, 0.3, 0.5])
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    grid = FrequencyGrid(1, args.points, args.half_length)
    prop = Propagator(grid)
    F = PolynomialNonlinearity.derivative_power(5)
    profile = gaussian_packet(grid, 0.0, 2.0)
    profile = profile * (1.0 / np.abs(profile.values).max())
    tg = TimeGrid(args.t_end, args.steps)

    u0 = profile * args.delta
    state = picard_solve(u0, F, prop, tg, tol=1e-8, min_iter=3)
    trace, _ = split_step_evolve(u0, F, prop, tg.dt, tg.steps)
    scat = extract_scattering_state(trace, prop, tg, 50, F)
    forward = free_evolve(scat.u_plus, tg.t_end, prop).physical().values
    mismatch = float(np.linalg.norm(forward - trace[-1]) / np.linalg.norm(trace[-1]))
    ladder = small_data_global_run(profile, F, prop, args.ladder, args.t_end, tg.dt)

    (out / "picard.json").write_text(dumps(state.record()))
    (out / "scattering.json").write_text(dumps(dict(scat.record(), forward_mismatch=mismatch)))
    (out / "growth.json").write_text(dumps(ladder.record()))
    print(json.dumps({"picard": state.status, "sweeps": state.iterate, "ratios": state.ratios,
                      "scattering_consistent": scat.verdict, "forward_mismatch": mismatch,
                      "h1_ratios": ladder.ratios}, indent=1))


if __name__ == "__main__":
    main()
