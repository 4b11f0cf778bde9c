"""Free Schrodinger group for the mixed-signature Laplacian and the Duhamel operator."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, Sequence, Union

import numpy as np

from .grid import (ContractError, FREQUENCY, FrequencyGrid, SpectralField, fft_values,
                   ifft_values)


def check_signature(signs: Sequence[int], dim: int | None = None) -> tuple[int, ...]:
    signs = tuple(int(s) for s in signs)
    if any(s not in (1, -1) for s in signs):
        raise ContractError(f"signature entries must be +1 or -1, got {signs}")
    if dim is not None and len(signs) != dim:
        raise ContractError(f"signature length {len(signs)} != dimension {dim}")
    return signs


def symbol_value(signature: Sequence[int], xi: Sequence[float]) -> float:
    """sum_j eps_j xi_j^2."""
    signature = check_signature(signature)
    if len(signature) != len(xi):
        raise ContractError("signature and frequency vector lengths differ")
    return float(sum(e * k * k for e, k in zip(signature, xi)))


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ContractError("time grid needs at least 2 steps")
        if not self.t_end > 0:
            raise ContractError("t_end must be positive")

    @property
    def dt(self) -> float:
        return self.t_end / self.steps

    @cached_property
    def nodes(self) -> np.ndarray:
        return self.t_end * np.arange(self.steps + 1) / self.steps

    @cached_property
    def weights(self) -> np.ndarray:
        """Composite-trapezoid weights on the nodes."""
        w = np.full(self.steps + 1, self.dt)
        w[0] = w[-1] = self.dt / 2
        return w

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_end, self.steps * factor)

    def extended(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_end * factor, self.steps * factor)

    def node_index(self, t: float) -> int:
        m = int(round(t / self.dt))
        if not 0 <= m <= self.steps or not np.isclose(self.nodes[m], t, rtol=0, atol=1e-12 * max(1.0, self.t_end)):
            raise ContractError(f"t={t} is not a node of the time grid")
        return m


class Propagator:
    """S(t) = exp(it Delta_pm), i.e. the Fourier multiplier exp(-it |xi|^2_pm)."""

    def __init__(self, grid: FrequencyGrid, signature: Sequence[int] | None = None):
        self.grid = grid
        self.signature = check_signature(signature if signature is not None else (1,) * grid.dim, grid.dim)
        sym = sum(e * k ** 2 for e, k in zip(self.signature, grid.xi))
        sym = np.asarray(sym, dtype=float)
        sym.setflags(write=False)
        self.symbol = sym

    @property
    def elliptic(self) -> bool:
        return all(s == 1 for s in self.signature)

    def multiplier(self, t: float) -> np.ndarray:
        return np.exp(-1j * t * self.symbol)

    def _check(self, f: SpectralField):
        if f.grid != self.grid:
            raise ContractError("field grid does not match propagator grid")

    def evolve_values(self, values: np.ndarray, t: float) -> np.ndarray:
        """S(t) on raw physical samples."""
        return ifft_values(self.grid, self.multiplier(t) * fft_values(self.grid, values))

    def free_trace(self, u0: SpectralField, times: Sequence[float]) -> np.ndarray:
        """Physical samples of S(t)u0 stacked along a leading time axis."""
        self._check(u0)
        hat = u0.frequency().values
        return np.stack([ifft_values(self.grid, self.multiplier(t) * hat) for t in times])

    def iter_free(self, u0: SpectralField, times: Sequence[float]) -> Iterator[np.ndarray]:
        self._check(u0)
        hat = u0.frequency().values
        for t in times:
            yield ifft_values(self.grid, self.multiplier(t) * hat)


def free_evolve(u0: SpectralField, t: float, prop: Propagator) -> SpectralField:
    prop._check(u0)
    out = SpectralField(prop.grid, prop.multiplier(t) * u0.frequency().values, FREQUENCY)
    return out if u0.rep == FREQUENCY else out.physical()


def semigroup_check(u0: SpectralField, t: float, s: float, prop: Propagator) -> float:
    """||S(t)S(s)u0 - S(t+s)u0||_2 / ||u0||_2."""
    prop._check(u0)
    hat = u0.frequency().values
    a = prop.multiplier(t) * (prop.multiplier(s) * hat)
    b = prop.multiplier(t + s) * hat
    norm = np.sqrt(np.sum(np.abs(hat) ** 2))
    return 0.0 if norm == 0 else float(np.sqrt(np.sum(np.abs(a - b) ** 2)) / norm)


Forcing = Union[np.ndarray, Callable[[int], Union[SpectralField, np.ndarray, None]]]


def _forcing_hat(forcing: Forcing, m: int, grid: FrequencyGrid) -> np.ndarray:
    if callable(forcing):
        f = forcing(m)
        if f is None:
            raise ContractError(f"forcing undefined at node {m}")
        if isinstance(f, SpectralField):
            if f.grid != grid:
                raise ContractError("forcing grid mismatch")
            return f.frequency().values
        return fft_values(grid, np.asarray(f))
    if m >= len(forcing):
        raise ContractError(f"forcing undefined at node {m}")
    return fft_values(grid, forcing[m])


def duhamel(forcing: Forcing, t: float, prop: Propagator, tgrid: TimeGrid) -> SpectralField:
    """Trapezoid quadrature of int_0^t S(t - s) f(s) ds on the nodes of ``tgrid``.

    ``forcing`` is either an array of physical samples indexed by node, or a
    callable returning the forcing at node ``m``.
    """
    m_end = tgrid.node_index(t)
    acc = np.zeros(prop.grid.shape, dtype=complex)
    dt = tgrid.dt
    for m in range(m_end + 1 if m_end else 0):
        wm = dt / 2 if m in (0, m_end) else dt
        acc += wm * np.exp(1j * tgrid.nodes[m] * prop.symbol) * _forcing_hat(forcing, m, prop.grid)
    return SpectralField(prop.grid, prop.multiplier(t) * acc, FREQUENCY).physical()


def iter_duhamel(forcing: Forcing, prop: Propagator, tgrid: TimeGrid) -> Iterator[np.ndarray]:
    """Yield physical samples of the Duhamel integral at every node, in order.

    Uses the running form exp(-it p) * sum_k w_k exp(i s_k p) f^(s_k), so each
    node costs one forward and one inverse transform.
    """
    grid = prop.grid
    dt = tgrid.dt
    acc = np.zeros(grid.shape, dtype=complex)
    prev = None
    for m, t in enumerate(tgrid.nodes):
        g = np.exp(1j * t * prop.symbol) * _forcing_hat(forcing, m, grid)
        if prev is not None:
            acc += dt / 2 * (prev + g)
        prev = g
        yield ifft_values(grid, prop.multiplier(t) * acc)


def duhamel_trace(forcing: Forcing, prop: Propagator, tgrid: TimeGrid) -> np.ndarray:
    """Duhamel integral at every node; vectorized when ``forcing`` is an array."""
    if callable(forcing):
        return np.stack(list(iter_duhamel(forcing, prop, tgrid)))
    forcing = np.asarray(forcing)
    if forcing.shape[0] != tgrid.steps + 1:
        raise ContractError("forcing must be given at every node")
    grid = prop.grid
    t = tgrid.nodes.reshape((-1,) + (1,) * grid.dim)
    g = np.exp(1j * t * prop.symbol) * fft_values(grid, forcing)
    acc = np.zeros_like(g)
    acc[1:] = np.cumsum(tgrid.dt / 2 * (g[1:] + g[:-1]), axis=0)
    return ifft_values(grid, np.exp(-1j * t * prop.symbol) * acc)


def boundary_amplitude(values: np.ndarray) -> float:
    a = np.abs(values)
    edges = [np.take(a, [0, -1], axis=ax).max() for ax in range(a.ndim)]
    return float(max(edges))


def decay_probe(u0: SpectralField, times: Sequence[float], prop: Propagator,
                wrap_threshold: float = 1e-6) -> list[float]:
    """Sup norms ||S(t)u0||_inf at the requested times."""
    out = []
    wrapped = False
    for t, vals in zip(times, prop.iter_free(u0, times)):
        a = np.abs(vals)
        peak = float(a.max())
        out.append(peak)
        if peak > 0 and boundary_amplitude(vals) > wrap_threshold * peak:
            wrapped = True
    if wrapped:
        warnings.warn("dispersed wave reached the box boundary; decay fit may be contaminated",
                      stacklevel=2)
    return out


def fit_loglog_slope(times: Sequence[float], values: Sequence[float]) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(times)), np.log(np.asarray(values)), 1)
    return float(slope)
