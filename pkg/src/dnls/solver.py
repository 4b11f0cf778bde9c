"""Picard iteration for u = S(t)u0 - i A F(u), split-step evolution and scattering extraction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .decomp import DecompositionBank, HOMOGENEOUS, DYADIC
from .grid import ContractError, SpectralField, derivative_values, fft_values, ifft_values
from .nonlinearity import PolynomialNonlinearity
from .norms import (CubePartition, composite_block_cube_norm, lp_sum, sobolev_multiplier,
                    x_norm_1d)
from .propagator import Propagator, TimeGrid, duhamel_trace

# differences below this fraction of the Duhamel part are round-off, not contraction data
ROUNDOFF_FLOOR = 1e-13


class SolverError(RuntimeError):
    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class DivergenceError(SolverError):
    """The Picard map failed to contract."""


class MaxIterError(SolverError):
    """No certified fixed point within the iteration budget."""


class EvolutionAbort(SolverError):
    """L^2 growth beyond the allowed factor during time stepping."""


@dataclass
class PicardState:
    iterate: int
    trace: np.ndarray | None
    tgrid: TimeGrid
    history: list = field(default_factory=list)
    radius: float = 0.0
    residual: float = math.nan
    status: str = "running"
    norm: str = "l2"
    grid: object = None
    l2_history: list = field(default_factory=list)
    l2_residual: float = math.nan
    floors: list = field(default_factory=list)

    @property
    def ratios(self) -> list:
        h, fl = self.history, self.floors
        return [h[k + 1] / h[k] for k in range(len(h) - 1) if h[k] > fl[k]]

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def geometric_tail(self, window: int = 3) -> bool:
        """Each of the last ``window`` steps shrinks the difference or sits at round-off."""
        h, fl = self.history[-(window + 1):], self.floors[-(window + 1):]
        return all(b < a or b <= f for a, b, f in zip(h, h[1:], fl[1:]))

    def final(self) -> SpectralField:
        if self.trace is None:
            raise SolverError("no solution stored")
        return SpectralField(self.grid, self.trace[-1])

    def record(self) -> dict:
        return {"iterations": self.iterate, "history": list(map(float, self.history)),
                "ratios": list(map(float, self.ratios)), "residual": float(self.residual),
                "radius": float(self.radius), "status": self.status, "norm": self.norm,
                "l2_history": list(map(float, self.l2_history)), "l2_residual": float(self.l2_residual)}


def default_norm(dim: int) -> str:
    """Working norm per dimension: the X-norm in 1D, the l^{1,s-1/2} family in 2D."""
    return "x1d" if dim == 1 else "x0"


def solution_metric(kind: str, prop: Propagator, tgrid: TimeGrid, **params) -> Callable[[np.ndarray], float]:
    """Norm of a space-time trace used to measure Picard differences.

    ``l2``   sup over nodes of the spatial L^2 norm;
    ``x1d``  the 1D solution norm (params m, M);
    ``x0``   l^{1,s-1/2}_Delta l^inf_alpha L^2_{t,x} summed over |beta| <= 1 (param s).
    """
    grid = prop.grid
    if kind == "l2":
        return lambda tr: float(np.max(lp_sum(tr.reshape(tr.shape[0], -1), 2, grid.cell_volume, axis=1)))
    if kind == "x1d":
        m, M = params.get("m", 4), params.get("M", 4)
        bank = DecompositionBank(grid, HOMOGENEOUS)
        return lambda tr: x_norm_1d(tr, tgrid, grid, m, M, bank=bank)
    if kind == "x0":
        s = params.get("s", 1.0)
        bank = DecompositionBank(grid, DYADIC)
        part = CubePartition(grid)

        def x0(tr):
            total = composite_block_cube_norm(tr, tgrid, s - 0.5, bank, math.inf, 2, 2, part)
            for ax in range(grid.dim):
                total += composite_block_cube_norm(derivative_values(grid, tr, ax), tgrid, s - 0.5,
                                                   bank, math.inf, 2, 2, part)
            return total
        return x0
    raise ContractError(f"unknown solution norm {kind!r}")


def picard_map(free: np.ndarray, u: np.ndarray, F: PolynomialNonlinearity | None, prop: Propagator,
               tgrid: TimeGrid, dealias: bool = False) -> np.ndarray:
    """T u = S(t)u0 - i A F(u) on the stored nodes."""
    return free + _duhamel_part(u, F, prop, tgrid, dealias)


def _duhamel_part(u, F, prop, tgrid, dealias):
    if F is None:
        return np.zeros_like(u)
    return -1j * duhamel_trace(F.evaluate_values(prop.grid, u, dealias), prop, tgrid)


def picard_solve(u0: SpectralField, F: PolynomialNonlinearity | None, prop: Propagator, tgrid: TimeGrid,
                 norm: str | None = None, tol: float = 1e-8, max_iter: int = 50, min_iter: int = 1,
                 dealias: bool = False, norm_params: dict | None = None) -> PicardState:
    """Iterate the Duhamel map from u = S(t)u0 until successive differences fall below ``tol``.

    The iteration runs on w = u - S(t)u0, so differences of iterates keep full
    relative precision even when the nonlinear part is tiny. Differences are
    measured relative to the metric size of the free evolution.
    ``norm=None`` picks the working norm for the dimension; sup_t L^2 is
    tracked alongside in ``l2_history``.
    Raises DivergenceError after three consecutive non-contracting steps and
    MaxIterError when the budget runs out.
    """
    if u0.grid != prop.grid:
        raise ContractError("datum grid does not match propagator grid")
    if prop.grid.dim == 2 and not prop.elliptic:
        hat = u0.frequency().values
        if np.abs(hat[prop.grid.xi_norm == 0]).max() > 1e-12 * max(np.abs(hat).max(), 1e-300):
            raise ContractError("2D non-elliptic runs need mean-zero data")
    norm = norm or default_norm(prop.grid.dim)
    metric = solution_metric(norm, prop, tgrid, **(norm_params or {}))
    l2 = solution_metric("l2", prop, tgrid)
    free = prop.free_trace(u0, tgrid.nodes)
    scale = metric(free) or 1.0
    l2_scale = l2(free) or 1.0
    state = PicardState(0, None, tgrid, norm=norm, grid=prop.grid)
    w = np.zeros_like(free)
    bad = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, max_iter + 1):
            new = _duhamel_part(free + w, F, prop, tgrid, dealias)
            d = metric(new - w) / scale
            state.history.append(d)
            state.l2_history.append(l2(new - w) / l2_scale)
            state.floors.append(ROUNDOFF_FLOOR * metric(new) / scale)
            state.iterate = k
            if k > 1:
                prev, floor = state.history[-2], state.floors[-2]
                bad = bad + 1 if prev > floor and d >= prev else 0
            w = new
            if bad >= 3 or not math.isfinite(d):
                state.status = "diverged"
                raise DivergenceError(f"Picard map not contracting after {k} sweeps", state)
            if d <= tol and k >= min_iter:
                gap = w - _duhamel_part(free + w, F, prop, tgrid, dealias)
                residual = metric(gap) / scale
                state.residual = residual
                state.l2_residual = l2(gap) / l2_scale
                if residual <= 2 * tol:
                    state.trace = free + w
                    state.radius = metric(state.trace)
                    state.status = "converged"
                    return state
    state.status = "max_iter"
    raise MaxIterError(f"no certified fixed point after {max_iter} sweeps", state)


def residual_certificate(state: PicardState, u0: SpectralField, F, prop: Propagator) -> float:
    """Relative L^2 size of u - S(t)u0 + i A F(u) for a stored solution."""
    free = prop.free_trace(u0, state.tgrid.nodes)
    metric = solution_metric("l2", prop, state.tgrid)
    return metric(state.trace - picard_map(free, state.trace, F, prop, state.tgrid)) / (metric(free) or 1.0)


def _nonlinear_rhs(F, grid, dealias):
    return lambda v: -1j * F.evaluate_values(grid, v, dealias)


def split_step_evolve(u0: SpectralField, F: PolynomialNonlinearity | None, prop: Propagator, dt: float,
                      steps: int, strang: bool = True, dealias: bool = False,
                      growth_limit: float = 10.0) -> tuple[np.ndarray, TimeGrid]:
    """Exact linear flow alternated with an RK2 step for u' = -i F(u).

    Strang ordering (half linear, full nonlinear, half linear) is second order;
    ``strang=False`` gives first-order Lie splitting.
    """
    if u0.grid != prop.grid:
        raise ContractError("datum grid does not match propagator grid")
    grid = prop.grid
    tgrid = TimeGrid(dt * steps, steps)
    half = prop.multiplier(dt / 2)
    full = prop.multiplier(dt)
    out = np.empty((steps + 1,) + grid.shape, dtype=complex)
    hat = u0.frequency().values.copy()
    out[0] = u0.physical().values
    mass0 = u0.l2()
    rhs = _nonlinear_rhs(F, grid, dealias) if F is not None else None
    for n in range(steps):
        if rhs is None:
            hat = full * hat
        else:
            hat = half * hat if strang else hat
            v = ifft_values(grid, hat)
            k1 = rhs(v)
            k2 = rhs(v + dt * k1)
            v = v + dt / 2 * (k1 + k2)
            hat = fft_values(grid, v)
            hat = half * hat if strang else full * hat
        out[n + 1] = ifft_values(grid, hat)
        if not np.all(np.isfinite(out[n + 1])):
            raise EvolutionAbort(f"non-finite values at step {n + 1}")
        mass = math.sqrt(np.sum(np.abs(out[n + 1]) ** 2) * grid.cell_volume)
        if mass0 > 0 and mass > growth_limit * mass0:
            raise EvolutionAbort(f"L2 norm grew by more than {growth_limit}x at step {n + 1}")
    return out, tgrid


@dataclass
class GrowthReport:
    deltas: list
    ratios: list
    s: float
    t_end: float

    @property
    def monotone(self) -> bool:
        r = self.ratios
        return all(b >= a - 1e-12 for a, b in zip(r, r[1:]))

    def bounded(self, limit: float = 2.0) -> list:
        return [r <= limit for r in self.ratios]

    def record(self) -> dict:
        return {"deltas": list(map(float, self.deltas)), "ratios": list(map(float, self.ratios)),
                "s": self.s, "t_end": self.t_end, "monotone": self.monotone}


def sobolev_trace(trace: np.ndarray, grid, s: float) -> np.ndarray:
    """H^s norm of every time slice."""
    mult = sobolev_multiplier(grid, s)
    hats = fft_values(grid, trace)
    axes = tuple(range(1, 1 + grid.dim))
    return np.sqrt(np.sum(np.abs(mult * hats) ** 2, axis=axes) * grid.frequency_cell)


def small_data_global_run(profile: SpectralField, F, prop: Propagator, deltas: Sequence[float],
                          t_end: float, dt: float, s: float = 1.0) -> GrowthReport:
    """Evolve u0 = delta * profile and record sup_t ||u||_{H^s} / ||u0||_{H^s} for each delta."""
    steps = max(2, int(round(t_end / dt)))
    ratios = []
    for delta in deltas:
        if delta == 0:
            ratios.append(1.0)
            continue
        trace, _ = split_step_evolve(profile * delta, F, prop, t_end / steps, steps)
        hs = sobolev_trace(trace, prop.grid, s)
        ratios.append(float(hs.max() / hs[0]))
    return GrowthReport(list(deltas), ratios, s, t_end)


@dataclass
class ScatteringRecord:
    times: list
    pullbacks: np.ndarray
    increments: list
    u_plus: SpectralField
    forward_gaps: list

    @property
    def verdict(self) -> bool:
        """Increments strictly decrease over the final half of the window."""
        inc = self.increments[len(self.increments) // 2:]
        return len(inc) >= 2 and all(b < a for a, b in zip(inc, inc[1:]))

    def record(self) -> dict:
        return {"times": list(map(float, self.times)), "increments": list(map(float, self.increments)),
                "forward_gaps": list(map(float, self.forward_gaps)),
                "u_plus_l2": self.u_plus.l2(), "scattering_consistent": self.verdict}


def extract_scattering_state(trace: np.ndarray, prop: Propagator, tgrid: TimeGrid,
                             sample_every: int = 1, F: PolynomialNonlinearity | None = None) -> ScatteringRecord:
    """Pull the solution back by the free flow: w_m = S(-t_m) u(t_m).

    With ``F`` supplied, increments w_{m+1} - w_m are evaluated as
    -i int_{t_m}^{t_{m+1}} S(-s) F(u(s)) ds (trapezoid on the stored nodes),
    which avoids cancelling two nearly equal pullbacks; otherwise they are
    plain differences.
    """
    grid = prop.grid
    idx = list(range(0, tgrid.steps + 1, sample_every))
    if idx[-1] != tgrid.steps:
        idx.append(tgrid.steps)
    times = tgrid.nodes[idx]
    hats = fft_values(grid, trace[idx])
    tt = times.reshape((-1,) + (1,) * grid.dim)
    w = np.exp(1j * tt * prop.symbol) * hats  # F[S(-t) u(t)]
    cell = grid.frequency_cell
    if F is None:
        inc = np.sqrt(np.sum(np.abs(np.diff(w, axis=0)) ** 2, axis=tuple(range(1, 1 + grid.dim))) * cell)
    else:
        allt = tgrid.nodes.reshape((-1,) + (1,) * grid.dim)
        g = np.exp(1j * allt * prop.symbol) * fft_values(grid, F.evaluate_values(grid, trace))
        inc = []
        for a, b in zip(idx, idx[1:]):
            seg = tgrid.dt / 2 * (g[a:b] + g[a + 1:b + 1]).sum(axis=0)
            inc.append(math.sqrt(np.sum(np.abs(seg) ** 2) * cell))
        inc = np.array(inc)
    u_plus = SpectralField(grid, ifft_values(grid, w[-1]))
    gaps = []
    for k, t in enumerate(times):
        diff = w[-1] - w[k]
        ref = math.sqrt(np.sum(np.abs(hats[k]) ** 2) * cell) or 1.0
        gaps.append(math.sqrt(np.sum(np.abs(diff) ** 2) * cell) / ref)
    return ScatteringRecord(list(times), ifft_values(grid, w), list(map(float, inc)), u_plus, gaps)
