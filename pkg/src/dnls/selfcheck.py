"""Fast invariant checks behind ``dnls selfcheck``."""
from __future__ import annotations

import numpy as np

from .decomp import DYADIC, UNIFORM, DecompositionBank
from .grid import FrequencyGrid, random_band_limited
from .nonlinearity import telescoping_product
from .propagator import Propagator, TimeGrid, free_evolve, semigroup_check
from .solver import picard_solve, split_step_evolve


def _check(name, value, limit):
    return {"name": name, "value": float(value), "limit": float(limit), "passed": bool(value <= limit)}


def run_selfcheck(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    checks = []
    unit = semi = 0.0
    for dim, sig in ((1, (1,)), (2, (1, 1)), (2, (1, -1))):
        grid = FrequencyGrid(dim, 64 if dim == 1 else 32, 8.0)
        prop = Propagator(grid, sig)
        for _ in range(3):
            u = random_band_limited(grid, int(rng.integers(2 ** 31)), grid.nyquist)
            t, s = rng.uniform(-5, 5, size=2)
            unit = max(unit, abs(free_evolve(u, t, prop).l2() / u.l2() - 1))
            semi = max(semi, semigroup_check(u, t, s, prop))
    checks.append(_check("unitarity", unit, 1e-12))
    checks.append(_check("semigroup", semi, 1e-12))

    g2 = FrequencyGrid(2, 32, 8.0)
    checks.append(_check("dyadic_partition", DecompositionBank(g2, DYADIC).partition_defect(), 1e-12))
    checks.append(_check("uniform_partition", DecompositionBank(FrequencyGrid(2, 16, 4.0), UNIFORM).partition_defect(), 1e-12))

    g1 = FrequencyGrid(1, 128, 16.0)
    fs = [random_band_limited(g1, int(rng.integers(2 ** 31)), 4.0) for _ in range(3)]
    direct = fs[0].physical().values * fs[1].physical().values * fs[2].physical().values
    tele = telescoping_product(fs).physical().values
    checks.append(_check("telescoping", np.abs(tele - direct).max() / np.abs(direct).max(), 1e-8))

    prop = Propagator(g1)
    tg = TimeGrid(1.0, 16)
    u0 = fs[0]
    free = prop.free_trace(u0, tg.nodes)
    state = picard_solve(u0, None, prop, tg, norm="l2")
    checks.append(_check("picard_linear", np.abs(state.trace - free).max() / np.abs(free).max(), 1e-12))
    trace, _ = split_step_evolve(u0, None, prop, tg.dt, tg.steps)
    checks.append(_check("split_step_linear", np.abs(trace - free).max() / np.abs(free).max(), 1e-12))
    return {"checks": checks, "passed": all(c["passed"] for c in checks)}
