"""Littlewood-Paley (dyadic) and frequency-uniform decompositions on the lattice."""
from __future__ import annotations

import itertools
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .grid import ContractError, FREQUENCY, FrequencyGrid, SpectralField, ifft_values, l2_sum

DYADIC = "dyadic"
HOMOGENEOUS = "homogeneous-dyadic"
UNIFORM = "uniform"


def _g(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def bump_psi(r):
    """Smooth radial cutoff: 1 on |r| <= 1, 0 on |r| >= 2, monotone in between."""
    a = np.abs(np.asarray(r, dtype=float))
    num = _g(2.0 - a)
    den = num + _g(a - 1.0)
    out = num / den
    return out if out.ndim else float(out)


def delta_bump(r):
    r = np.asarray(r, dtype=float)
    out = bump_psi(r) - bump_psi(2 * r)
    return out if np.ndim(out) else float(out)


def dyadic_multiplier(j: int, xi):
    """phi_j at frequency magnitude(s) ``xi``.

    phi_j = delta(2^-j .) for j >= 1 and phi_0 = psi, which is what
    1 - sum_{j>=1} phi_j telescopes to.
    """
    if j < 0:
        raise ContractError("inhomogeneous dyadic index must be >= 0")
    r = np.abs(np.asarray(xi, dtype=float))
    if j == 0:
        return bump_psi(r)
    return delta_bump(r / 2.0 ** j)


def homogeneous_multiplier(j: int, r):
    """delta(2^-j |xi|) for any integer j."""
    return delta_bump(np.abs(np.asarray(r, dtype=float)) / 2.0 ** j)


def rho(xi, dim: int):
    """Translate-generating bump: 1 on |xi| <= sqrt(n)/2, 0 on |xi| >= sqrt(n)."""
    return bump_psi(2.0 * np.asarray(xi, dtype=float) / np.sqrt(dim))


def _rho_sum(xis: tuple[np.ndarray, ...], dim: int) -> np.ndarray:
    base = [np.floor(x) for x in xis]
    total = np.zeros(np.shape(xis[0]))
    reach = int(np.ceil(np.sqrt(dim))) + 1
    for off in itertools.product(range(-reach, reach + 1), repeat=dim):
        r2 = sum((x - (b + o)) ** 2 for x, b, o in zip(xis, base, off))
        total = total + rho(np.sqrt(r2), dim)
    return total


def uniform_multiplier(k, xi):
    """sigma_k(xi) = rho(xi - k) / sum_l rho(xi - l)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    xi = np.asarray(xi, dtype=float)
    dim = k.size
    if xi.ndim == 0:
        xi = xi[None]
    xis = tuple(np.moveaxis(xi, -1, 0)) if xi.shape[-1] == dim else (xi,)
    if len(xis) != dim:
        raise ContractError("k and xi dimensions differ")
    num = rho(np.sqrt(sum((x - kk) ** 2 for x, kk in zip(xis, k))), dim)
    out = num / _rho_sum(xis, dim)
    return out if np.ndim(out) else float(out)


def uniform_overlap_set(dim: int) -> list[tuple[int, ...]]:
    """Lambda = {l : supp sigma_l meets supp sigma_0}: |l| < 2 sqrt(n)."""
    reach = int(np.ceil(2 * np.sqrt(dim)))
    return [l for l in itertools.product(range(-reach, reach + 1), repeat=dim)
            if np.sqrt(sum(c * c for c in l)) < 2 * np.sqrt(dim)]


class DecompositionBank:
    """Frequency multipliers for one family of blocks on a fixed grid.

    kind is ``dyadic`` (j = 0..J), ``homogeneous-dyadic`` (j = jmin..jmax,
    all of Z restricted to the lattice) or ``uniform`` (k in [-K, K]^n).
    """

    def __init__(self, grid: FrequencyGrid, kind: str = DYADIC):
        self.grid = grid
        self.kind = kind
        r = grid.xi_norm
        rmax = float(r.max())
        if kind == DYADIC:
            self.j_max = max(1, int(np.ceil(np.log2(rmax))))
            self.indices = list(range(0, self.j_max + 1))
        elif kind == HOMOGENEOUS:
            rmin = float(r[r > 0].min())
            self.j_min = int(np.floor(np.log2(rmin)))
            self.j_max = max(self.j_min, int(np.ceil(np.log2(rmax))))
            self.indices = list(range(self.j_min, self.j_max + 1))
        elif kind == UNIFORM:
            self.K = int(np.ceil(grid.nyquist + np.sqrt(grid.dim)))
            rng = range(-self.K, self.K + 1)
            self.indices = [k if grid.dim > 1 else (k[0],) for k in itertools.product(rng, repeat=grid.dim)]
        else:
            raise ContractError(f"unknown bank kind {kind!r}")
        self._index_set = set(self.indices)
        self._cache: dict = {}

    def _normalize(self, index):
        if self.kind == UNIFORM:
            index = tuple(int(c) for c in np.atleast_1d(index))
        else:
            index = int(index)
        if index not in self._index_set:
            raise ContractError(f"index {index} outside bank range")
        return index

    def __contains__(self, index) -> bool:
        try:
            self._normalize(index)
        except ContractError:
            return False
        return True

    @cached_property
    def _rho_den(self) -> np.ndarray:
        return _rho_sum(self.grid.xi, self.grid.dim)

    def multiplier(self, index) -> np.ndarray:
        index = self._normalize(index)
        if index in self._cache:
            return self._cache[index]
        r = self.grid.xi_norm
        if self.kind == DYADIC:
            m = bump_psi(r) if index == 0 else delta_bump(r / 2.0 ** index)
        elif self.kind == HOMOGENEOUS:
            m = np.where(r > 0, delta_bump(r / 2.0 ** index), 0.0)
        else:
            d = np.sqrt(sum((x - c) ** 2 for x, c in zip(self.grid.xi, index)))
            m = rho(d, self.grid.dim) / self._rho_den
            if len(self._cache) > 64:
                return m
        m = np.asarray(m, dtype=float)
        m.setflags(write=False)
        self._cache[index] = m
        return m

    def weight(self, index, s: float) -> float:
        """2^{sj} for dyadic kinds, <k>^s for uniform blocks."""
        index = self._normalize(index)
        if self.kind == UNIFORM:
            return float((1 + sum(c * c for c in index)) ** (s / 2))
        return float(2.0 ** (s * index))

    def active(self, hat: np.ndarray, indices: Iterable | None = None) -> list:
        """Indices whose block of ``hat`` is not identically zero."""
        support = np.abs(hat) > 0
        out = []
        if self.kind == UNIFORM:
            dim = self.grid.dim
            pts = np.stack([x[support] for x in self.grid.xi], axis=-1)
            if not pts.size:
                return []
            base = np.floor(pts).astype(int)
            reach = int(np.ceil(np.sqrt(dim)))
            hits = set()
            for off in itertools.product(range(-reach, reach + 2), repeat=dim):
                k = base + np.asarray(off)
                near = np.sum((pts - k) ** 2, axis=-1) < dim
                hits.update(map(tuple, np.unique(k[near], axis=0).tolist()))
            allowed = self._index_set if indices is None else {self._normalize(i) for i in indices}
            return sorted(h for h in hits if h in allowed)
        r = self.grid.xi_norm[support]
        for idx in (self.indices if indices is None else indices):
            lo, hi = 2.0 ** (idx - 1), 2.0 ** (idx + 1)
            if self.kind == DYADIC and idx == 0:
                lo = -1.0
            if r.size and np.any((r > lo) & (r < hi)):
                out.append(idx)
        return out

    def block_values(self, index, hat: np.ndarray) -> np.ndarray:
        """Physical samples of the block applied to frequency values ``hat``."""
        return ifft_values(self.grid, self.multiplier(index) * hat)

    def iter_blocks(self, f: SpectralField) -> Iterator[tuple[object, np.ndarray]]:
        hat = f.frequency().values
        for idx in self.active(hat):
            yield idx, self.block_values(idx, hat)

    def partition_defect(self) -> float:
        total = np.zeros(self.grid.shape)
        for idx in self.indices:
            total += self.multiplier(idx)
        target = np.ones(self.grid.shape)
        if self.kind == HOMOGENEOUS:
            target[self.grid.xi_norm == 0] = 0.0
        return float(np.max(np.abs(total - target)))


def apply_block(bank: DecompositionBank, index, f: SpectralField) -> SpectralField:
    if f.grid != bank.grid:
        raise ContractError("field grid does not match bank grid")
    out = SpectralField(bank.grid, bank.multiplier(index) * f.frequency().values, FREQUENCY)
    return out if f.rep == FREQUENCY else out.physical()


def homogeneous_annulus_coefficient_1d(j: int, f: SpectralField) -> float:
    """(sum over lattice |xi| in [2^j, 2^{j+1}) of |F f|^2 dxi)^{1/2}."""
    if f.grid.dim != 1:
        raise ContractError("annulus coefficients are defined for 1D grids")
    hat = f.frequency().values
    r = f.grid.xi_norm
    mask = (r >= 2.0 ** j) & (r < 2.0 ** (j + 1))
    return l2_sum(hat[mask], f.grid.dxi)


def annulus_range_1d(grid: FrequencyGrid) -> range:
    r = grid.xi_norm
    lo = int(np.floor(np.log2(r[r > 0].min())))
    hi = int(np.floor(np.log2(r.max())))
    return range(lo, hi + 1)


def partial_sum_multiplier(bank: DecompositionBank, r: int) -> np.ndarray:
    if bank.kind == UNIFORM:
        raise ContractError("partial sums need a dyadic bank")
    out = np.zeros(bank.grid.shape)
    for j in bank.indices:
        if j <= r:
            out = out + bank.multiplier(j)
    return out


def partial_sum(r: int, f: SpectralField, bank: DecompositionBank) -> SpectralField:
    """S_r f = sum_{j <= r} Delta_j f; zero when r is below the bank range."""
    if f.grid != bank.grid:
        raise ContractError("field grid does not match bank grid")
    out = SpectralField(bank.grid, partial_sum_multiplier(bank, r) * f.frequency().values, FREQUENCY)
    return out if f.rep == FREQUENCY else out.physical()
