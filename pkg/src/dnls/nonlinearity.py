"""Polynomial nonlinearities F(u, ubar, grad u, grad ubar) and scaling bookkeeping."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .decomp import DYADIC, DecompositionBank
from .grid import (ContractError, FrequencyGrid, SpectralField, derivative_values, fft_values,
                   ifft_values)


@dataclass(frozen=True)
class Monomial:
    """c * u^k1 ubar^k2 * prod_i (d_i u)^a_i (d_i ubar)^b_i."""

    coeff: complex
    kappa: tuple[int, int]
    nu: tuple[tuple[int, int], ...]

    @property
    def degree(self) -> int:
        return sum(self.kappa) + sum(a + b for a, b in self.nu)

    @property
    def holomorphic_degree(self) -> int:
        return self.kappa[0] + sum(a for a, _ in self.nu)

    @property
    def antiholomorphic_degree(self) -> int:
        return self.kappa[1] + sum(b for _, b in self.nu)


class PolynomialNonlinearity:
    def __init__(self, terms: Sequence[Monomial], dim: int):
        terms = tuple(terms)
        if not terms:
            raise ContractError("a nonlinearity needs at least one term")
        for t in terms:
            if not np.isfinite(t.coeff):
                raise ContractError("coefficients must be finite")
            if len(t.nu) != dim:
                raise ContractError(f"term has {len(t.nu)} derivative slots, dimension is {dim}")
            if min(t.kappa) < 0 or any(min(p) < 0 for p in t.nu):
                raise ContractError("exponents must be nonnegative")
        degrees = [t.degree for t in terms]
        if min(degrees) < 2:
            raise ContractError("every term needs total degree >= 2 (m >= 1)")
        self.terms = terms
        self.dim = dim
        self.m = min(degrees) - 1
        self.M = max(degrees) - 1

    @classmethod
    def monomial(cls, dim: int, coeff=1.0, kappa=(0, 0), nu=None) -> "PolynomialNonlinearity":
        nu = tuple(tuple(p) for p in (nu or [(0, 0)] * dim))
        return cls([Monomial(complex(coeff), tuple(kappa), nu)], dim)

    @classmethod
    def derivative_power(cls, power: int, dim: int = 1, coeff=1.0) -> "PolynomialNonlinearity":
        """c (d_1 u)^power."""
        nu = [(power, 0)] + [(0, 0)] * (dim - 1)
        return cls.monomial(dim, coeff, (0, 0), nu)

    @classmethod
    def cubic(cls, dim: int = 1, coeff=1.0) -> "PolynomialNonlinearity":
        """c |u|^2 u."""
        return cls.monomial(dim, coeff, (2, 1))

    @property
    def uses_derivatives(self) -> bool:
        return any(a or b for t in self.terms for a, b in t.nu)

    def to_json(self) -> list:
        return [{"re": t.coeff.real, "im": t.coeff.imag, "kappa": list(t.kappa),
                 "nu": [list(p) for p in t.nu]} for t in self.terms]

    @classmethod
    def from_json(cls, data) -> "PolynomialNonlinearity":
        if isinstance(data, dict):
            data = data.get("terms")
        if not isinstance(data, list) or not data:
            raise ContractError("nonlinearity spec must be a non-empty list of terms")
        terms = []
        dim = None
        for raw in data:
            try:
                nu = tuple(tuple(int(c) for c in p) for p in raw["nu"])
                kappa = tuple(int(c) for c in raw["kappa"])
                coeff = complex(float(raw.get("re", 0.0)), float(raw.get("im", 0.0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ContractError(f"malformed term {raw!r}") from exc
            if len(kappa) != 2 or any(len(p) != 2 for p in nu):
                raise ContractError(f"malformed exponents in {raw!r}")
            if dim is None:
                dim = len(nu)
            terms.append(Monomial(coeff, kappa, nu))
        return cls(terms, dim)

    @classmethod
    def load(cls, path) -> "PolynomialNonlinearity":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def evaluate_values(self, grid: FrequencyGrid, values: np.ndarray, dealias: bool = False) -> np.ndarray:
        """Pointwise F on physical samples; leading batch axes are allowed."""
        if grid.dim != self.dim:
            raise ContractError("nonlinearity dimension does not match grid")
        if dealias:
            values = _two_thirds(grid, values)
        u = values
        ub = np.conj(u)
        need = {i for t in self.terms for i, (a, b) in enumerate(t.nu) if a or b}
        du = {i: derivative_values(grid, u, i) for i in need}
        out = np.zeros(np.shape(u), dtype=complex)
        for t in self.terms:
            term = t.coeff * _pow(u, t.kappa[0]) * _pow(ub, t.kappa[1])
            for i, (a, b) in enumerate(t.nu):
                if a:
                    term = term * du[i] ** a
                if b:
                    term = term * np.conj(du[i]) ** b
            out = out + term
        if dealias:
            out = _two_thirds(grid, out)
        return out


def _pow(z, k):
    return 1.0 if k == 0 else z ** k


def _two_thirds(grid: FrequencyGrid, values: np.ndarray) -> np.ndarray:
    keep = np.ones(grid.shape, dtype=bool)
    for k in grid.xi:
        keep &= np.abs(k) <= (2.0 / 3.0) * grid.nyquist
    return ifft_values(grid, keep * fft_values(grid, values))


def evaluate(F: PolynomialNonlinearity, u: SpectralField, dealias: bool = False) -> SpectralField:
    vals = F.evaluate_values(u.grid, u.physical().values, dealias)
    return SpectralField(u.grid, vals)


def critical_index(nu: int, n: int) -> float:
    """Scale-invariant Sobolev index 1 + n/2 - 1/(nu - 1) for i u_t + Delta u = (d_1 u)^nu."""
    if nu < 2:
        raise ContractError("power nu must be >= 2")
    return float(1 + Fraction(n, 2) - Fraction(1, nu - 1))


def index_pair(kappa: int) -> tuple[float, float]:
    """(1/2 - 2/kappa, 1/2 - 1/kappa)."""
    if kappa < 1:
        raise ContractError("kappa must be >= 1")
    k = Fraction(kappa)
    return float(Fraction(1, 2) - 2 / k), float(Fraction(1, 2) - 1 / k)


def dilate(u: SpectralField, lam: float) -> SpectralField:
    """u(lam x) on the same grid for lam = 2^j; u must be localized within the box."""
    j = np.log2(lam)
    if lam <= 0 or abs(j - round(j)) > 1e-12:
        raise ContractError(f"dilation factor must be a power of two, got {lam}")
    j = int(round(j))
    grid = u.grid
    vals = u.physical().values
    N = grid.points
    for _ in range(abs(j)):
        if j > 0:
            # u(2 x_m): x_m -> 2 x_m maps index m to 2m - N/2 when it stays in the box
            idx = 2 * np.arange(N) - N // 2
            inside = (idx >= 0) & (idx < N)
            src = np.clip(idx, 0, N - 1)
            new = vals
            for ax in range(grid.dim):
                new = np.take(new, src, axis=ax)
                shape = [1] * grid.dim
                shape[ax] = N
                new = new * inside.reshape(shape)
            vals = new
        else:
            vals = _half_dilation(grid, vals)
    return SpectralField(grid, vals)


def _half_dilation(grid: FrequencyGrid, vals: np.ndarray) -> np.ndarray:
    """Samples of u(x/2) at every lattice x, from the interpolant of u."""
    N = grid.points
    # x_m / 2 = -L/2 + m h / 2: index (m/2 + N/4) on the lattice, half-offset for odd m
    base = np.arange(N) // 2 + N // 4
    odd = (np.arange(N) % 2).astype(bool)
    out = vals
    for ax in range(grid.dim):
        shifted = _axis_half_shift(grid, out, ax)
        a = np.take(out, base, axis=ax)
        b = np.take(shifted, base, axis=ax)
        shape = [1] * grid.dim
        shape[ax] = N
        out = np.where(odd.reshape(shape), b, a)
    return out


def _axis_half_shift(grid: FrequencyGrid, vals: np.ndarray, axis: int) -> np.ndarray:
    k = grid.xi1d
    nyq = np.isclose(k, -grid.nyquist)
    hat = np.fft.fft(vals, axis=axis)
    mult = np.where(nyq, 0, np.exp(1j * k * grid.spacing / 2))
    shape = [1] * grid.dim
    shape[axis] = grid.points
    return np.fft.ifft(hat * mult.reshape(shape), axis=axis)


def scaling_transform(u: SpectralField, lam: float, nu: int) -> SpectralField:
    """u_lam(0, x) = lam^{(2 - nu)/(nu - 1)} u(lam x)."""
    if nu < 2:
        raise ContractError("power nu must be >= 2")
    return dilate(u, lam) * lam ** ((2.0 - nu) / (nu - 1.0))


def telescoping_product(fields: Sequence[SpectralField], bank: DecompositionBank | None = None) -> SpectralField:
    """Rebuild v_1...v_K from sum_r sum_k Delta_{r+1} v_k prod_{i<k} S_r v_i prod_{i>k} S_{r+1} v_i."""
    if not fields:
        raise ContractError("need at least one factor")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise ContractError("grid mismatch among factors")
    bank = bank or DecompositionBank(grid, DYADIC)
    if bank.grid != grid or bank.kind != DYADIC:
        raise ContractError("telescoping needs a dyadic bank on the factors' grid")
    hats = [f.frequency().values for f in fields]
    K = len(fields)
    total = np.zeros(grid.shape, dtype=complex)
    low = [np.zeros(grid.shape, dtype=complex) for _ in range(K)]  # S_r v_i, starting at r = -1
    for j in bank.indices:  # j = r + 1
        mult = bank.multiplier(j)
        block = [ifft_values(grid, mult * h) for h in hats]
        high = [lo + b for lo, b in zip(low, block)]  # S_{r+1} v_i
        for k in range(K):
            term = block[k]
            for i in range(k):
                term = term * low[i]
            for i in range(k + 1, K):
                term = term * high[i]
            total += term
        low = high
    return SpectralField(grid, total)

