"""Function-space norms on grid fields and space-time traces.

Traces are arrays of physical samples with a leading time axis, paired with
the :class:`~dnls.propagator.TimeGrid` they were recorded on.  Time integrals
use trapezoid weights; L^inf in time or space is a maximum over samples.
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .decomp import (DYADIC, HOMOGENEOUS, UNIFORM, DecompositionBank, annulus_range_1d,
                     homogeneous_annulus_coefficient_1d)
from .grid import (ContractError, FrequencyGrid, SpectralField, derivative_values, fft_values,
                   ifft_values)
from .nonlinearity import index_pair
from .propagator import TimeGrid

INF = math.inf
TAIL_WARN = 0.01


@dataclass
class NormReport:
    norm_id: str
    params: dict
    value: float
    tail_fraction: float = 0.0
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if not self.value >= 0:
            raise ContractError(f"norm value must be nonnegative, got {self.value}")
        if self.tail_fraction >= TAIL_WARN and not self.warnings:
            self.warnings.append(f"index-sum tail fraction {self.tail_fraction:.3g} exceeds {TAIL_WARN}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = {k: _jsonable(v) for k, v in self.params.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _jsonable(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def _check_exponent(p, name="p"):
    if not (p >= 1):
        raise ContractError(f"exponent {name}={p} must lie in [1, inf]")


def lp_sum(a: np.ndarray, p: float, weight: float | np.ndarray = 1.0, axis=None):
    """(sum w |a|^p)^{1/p}, or max |a| for p = inf."""
    a = np.abs(a)
    if p == INF:
        return np.max(a, axis=axis, initial=0.0)
    # factor out the max so a^p neither underflows nor overflows
    top = np.max(a, axis=axis, initial=0.0, keepdims=True)
    scale = np.where(top > 0, top, 1.0)
    out = np.sum(weight * (a / scale) ** p, axis=axis, keepdims=True) ** (1.0 / p) * scale
    return out.reshape(()).item() if axis is None else np.squeeze(out, axis=axis)


def lebesgue_norm(f: SpectralField, p: float) -> float:
    _check_exponent(p)
    vals = f.physical().values
    return float(lp_sum(vals, p, f.grid.cell_volume))


def sobolev_multiplier(grid: FrequencyGrid, s: float, homogeneous: bool = False) -> np.ndarray:
    r = grid.xi_norm
    if not homogeneous:
        return (1 + r ** 2) ** (s / 2)
    out = np.zeros_like(r)
    nz = r > 0
    out[nz] = r[nz] ** s
    return out


def sobolev_norm(f: SpectralField, s: float, homogeneous: bool = False, mean_tol: float = 1e-12) -> float:
    """||<xi>^s F f||_2, or ||xi|^s F f||_2 with the zero mode excluded."""
    hat = f.frequency().values
    grid = f.grid
    if homogeneous and s < 0:
        zero = grid.xi_norm == 0
        scale = max(float(np.max(np.abs(hat))), 1e-300)
        if np.abs(hat[zero]).max() > mean_tol * scale:
            raise ContractError("homogeneous Sobolev norm with s < 0 needs a mean-zero datum")
    m = sobolev_multiplier(grid, s, homogeneous)
    return float(lp_sum(m * hat, 2, grid.frequency_cell))


def mean_zero(f: SpectralField) -> SpectralField:
    hat = f.frequency().values.copy()
    hat[f.grid.xi_norm == 0] = 0
    out = SpectralField(f.grid, hat, "frequency")
    return out if f.rep == "frequency" else out.physical()


def _tail_fraction(terms: dict, tail_keys: Iterable) -> float:
    total = sum(terms.values())
    if total == 0:
        return 0.0
    return float(sum(terms.get(k, 0.0) for k in tail_keys) / total)


def _block_sum_report(norm_id, f, bank, s, p, q, params) -> NormReport:
    _check_exponent(p)
    _check_exponent(q, "q")
    if f.grid != bank.grid:
        raise ContractError("field grid does not match bank grid")
    hat = f.frequency().values
    terms = {}
    for idx in bank.active(_support_hint(hat)):
        if p == 2:
            # Plancherel holds exactly for the lattice transform
            size = lp_sum(bank.multiplier(idx) * hat, 2, f.grid.frequency_cell)
        else:
            size = lp_sum(bank.block_values(idx, hat), p, f.grid.cell_volume)
        terms[idx] = bank.weight(idx, s) * float(size)
    vals = np.array(list(terms.values()))
    value = float(lp_sum(vals, q)) if vals.size else 0.0
    powered = {k: (v if q == INF else v ** q) for k, v in terms.items()}
    if bank.kind == UNIFORM:
        outer = [k for k in bank.indices if max(abs(c) for c in k) >= bank.K - 1]
    else:
        outer = bank.indices[-2:]
    tail = _tail_fraction(powered, outer)
    rep = NormReport(norm_id, params, value, tail)
    for w in rep.warnings:
        warnings.warn(w, stacklevel=3)
    return rep


def besov_report(f: SpectralField, s: float, p: float, q: float, bank: DecompositionBank | None = None) -> NormReport:
    bank = bank or DecompositionBank(f.grid, DYADIC)
    if bank.kind != DYADIC:
        raise ContractError("Besov norms use the inhomogeneous dyadic bank")
    return _block_sum_report("besov", f, bank, s, p, q, {"s": s, "p": p, "q": q})


def besov_norm(f: SpectralField, s: float, p: float, q: float, bank: DecompositionBank | None = None) -> float:
    """(sum_j 2^{sjq} ||Delta_j f||_p^q)^{1/q}."""
    return besov_report(f, s, p, q, bank).value


def modulation_report(f: SpectralField, s: float, p: float, q: float, bank: DecompositionBank | None = None) -> NormReport:
    bank = bank or DecompositionBank(f.grid, UNIFORM)
    if bank.kind != UNIFORM:
        raise ContractError("modulation norms use the uniform bank")
    return _block_sum_report("modulation", f, bank, s, p, q, {"s": s, "p": p, "q": q})


def modulation_norm(f: SpectralField, s: float, p: float, q: float, bank: DecompositionBank | None = None) -> float:
    """(sum_k <k>^{sq} ||box_k f||_p^q)^{1/q}."""
    return modulation_report(f, s, p, q, bank).value


def homogeneous_besov_norm_1d(f: SpectralField, s: float) -> float:
    """sum_j 2^{sj} (int_{2^j <= |xi| < 2^{j+1}} |F f|^2)^{1/2} over the lattice annuli."""
    if f.grid.dim != 1:
        raise ContractError("homogeneous Besov norm is implemented for 1D grids")
    return float(sum(2.0 ** (s * j) * homogeneous_annulus_coefficient_1d(j, f)
                     for j in annulus_range_1d(f.grid)))


def embedding_table(fields: Sequence[SpectralField], s_besov: float = 1.1, s_mod: float = 0.0,
                    p: float = 2.0, q: float = 1.0) -> list[dict]:
    """Per-field M^{s_mod}_{p,q} and B^{s_besov}_{p,q} values with their ratio.

    The ensemble max of ``ratio`` is the empirical embedding constant.
    """
    rows = []
    for i, f in enumerate(fields):
        m = modulation_norm(f, s_mod, p, q)
        b = besov_norm(f, s_besov, p, q)
        rows.append({"index": i, "modulation": m, "besov": b, "ratio": m / b if b > 0 else INF})
    return rows


# -- cube-decomposed space-time norms ----------------------------------------

class CubePartition:
    """Unit cubes alpha + [-1/2, 1/2)^n with integer centres, wrapped onto the box."""

    def __init__(self, grid: FrequencyGrid):
        two_l = 2 * grid.half_length
        if abs(two_l - round(two_l)) > 1e-9:
            raise ContractError(f"cube partition needs 2L integer, got 2L={two_l}")
        self.grid = grid
        period = int(round(two_l))
        lo = -grid.half_length
        axis_labels = []
        for x in grid.x1d:
            a = math.floor(x + 0.5 + 1e-12)
            # wrap into [ceil(lo), ceil(lo) + period)
            start = math.ceil(lo - 1e-12)
            axis_labels.append((a - start) % period + start)
        axis_labels = np.array(axis_labels)
        self.axis_centres = np.unique(axis_labels)
        pos = np.searchsorted(self.axis_centres, axis_labels)
        m = len(self.axis_centres)
        if grid.dim == 1:
            labels = pos
        else:
            labels = pos[:, None] * m + pos[None, :]
        self.labels = labels.ravel()
        self.count = m ** grid.dim
        self.order = np.argsort(self.labels, kind="stable")
        sorted_labels = self.labels[self.order]
        self.starts = np.searchsorted(sorted_labels, np.arange(self.count))
        self.sizes = np.bincount(self.labels, minlength=self.count)

    @property
    def centres(self) -> list[tuple[int, ...]]:
        return [tuple(int(c) for c in a) for a in itertools.product(self.axis_centres, repeat=self.grid.dim)]

    def cube_of(self, alpha) -> int:
        alpha = np.atleast_1d(alpha)
        m = len(self.axis_centres)
        idx = 0
        for a in alpha:
            hits = np.nonzero(self.axis_centres == a)[0]
            if not hits.size:
                raise ContractError(f"cube {tuple(alpha)} not in box")
            idx = idx * m + int(hits[0])
        return idx

    def mask(self, alpha) -> np.ndarray:
        return (self.labels == self.cube_of(alpha)).reshape(self.grid.shape)

    def spatial_norms(self, values: np.ndarray, r: float) -> np.ndarray:
        """Per-cube L^r_x norms of physical samples (leading batch axes allowed)."""
        lead = values.shape[: values.ndim - self.grid.dim]
        a = np.abs(values).reshape(lead + (-1,))
        if r == INF:
            return np.maximum.reduceat(a[..., self.order], self.starts, axis=-1)
        h = self.grid.cell_volume
        if a.ndim == 1:
            sums = np.bincount(self.labels, weights=a ** r, minlength=self.count)
        else:
            sums = np.add.reduceat((a ** r)[..., self.order], self.starts, axis=-1)
        return (h * sums) ** (1.0 / r)


class CubeAccumulator:
    """Streams time slices into per-cube L^p_t L^r_x norms."""

    def __init__(self, partition: CubePartition, p_time: float, r_space: float):
        _check_exponent(p_time, "p_time")
        _check_exponent(r_space, "r_space")
        self.partition = partition
        self.p = p_time
        self.r = r_space
        self.acc = np.zeros(partition.count)

    def add(self, values: np.ndarray, weight: float) -> None:
        g = self.partition.spatial_norms(values, self.r)
        if self.p == INF:
            np.maximum(self.acc, g, out=self.acc)
        else:
            self.acc += weight * g ** self.p

    def cube_norms(self) -> np.ndarray:
        return self.acc if self.p == INF else self.acc ** (1.0 / self.p)


def _slices(trace) -> Iterable[np.ndarray]:
    return trace if not isinstance(trace, np.ndarray) else (trace[m] for m in range(trace.shape[0]))


def cube_norms(trace, tgrid: TimeGrid, p_time: float, r_space: float,
               partition: CubePartition | None = None, grid: FrequencyGrid | None = None) -> np.ndarray:
    """Per-cube ||f||_{L^p_t L^r_x(I x Q_alpha)}; ``trace`` is an array or iterable of slices."""
    if partition is None:
        if grid is None:
            raise ContractError("need a grid or a partition")
        partition = CubePartition(grid)
    acc = CubeAccumulator(partition, p_time, r_space)
    w = tgrid.weights
    m = -1
    for m, vals in enumerate(_slices(trace)):
        acc.add(vals, w[m])
    if m != tgrid.steps:
        raise ContractError(f"trace has {m + 1} slices, time grid has {tgrid.steps + 1} nodes")
    return acc.cube_norms()


def cube_mixed_norm(trace, tgrid: TimeGrid, q_outer: float, p_time: float, r_space: float,
                    grid: FrequencyGrid | None = None, partition: CubePartition | None = None) -> float:
    """||f||_{l^q_alpha(L^p_t L^r_x(I x Q_alpha))}."""
    _check_exponent(q_outer, "q_outer")
    if partition is None and grid is None and isinstance(trace, np.ndarray):
        raise ContractError("grid must be supplied with a raw trace array")
    norms = cube_norms(trace, tgrid, p_time, r_space, partition, grid)
    return float(lp_sum(norms, q_outer))


def space_time_norm(trace, tgrid: TimeGrid, p_time: float, r_space: float, grid: FrequencyGrid) -> float:
    """Global ||f||_{L^p_t L^r_x([0,T] x box)}."""
    w = tgrid.weights
    per_t = np.array([lp_sum(v, r_space, grid.cell_volume) for v in _slices(trace)])
    return float(lp_sum(per_t, p_time, w if p_time != INF else 1.0))


def space_time_norm_xt(trace: np.ndarray, tgrid: TimeGrid, p_space: float, q_time: float,
                       grid: FrequencyGrid) -> float:
    """Global ||f||_{L^p_x L^q_t}: time norm inside, space norm outside."""
    a = np.abs(np.asarray(trace))
    w = tgrid.weights.reshape((-1,) + (1,) * grid.dim)
    inner = lp_sum(a, q_time, w if q_time != INF else 1.0, axis=0)
    return float(lp_sum(inner, p_space, grid.cell_volume))


def composite_block_cube_norm(trace, tgrid: TimeGrid, s: float, bank: DecompositionBank,
                              q_outer: float, p_time: float, r_space: float,
                              partition: CubePartition | None = None) -> float:
    """sum_idx weight(idx, s) ||block_idx f||_{l^q_alpha(L^p_t L^r_x)} (time slice outer loop)."""
    return composite_block_cube_report(trace, tgrid, s, bank, q_outer, p_time, r_space, partition).value


def composite_block_cube_report(trace, tgrid, s, bank, q_outer, p_time, r_space, partition=None) -> NormReport:
    grid = bank.grid
    partition = partition or CubePartition(grid)
    accs: dict = {}
    w = tgrid.weights
    count = 0
    for m, vals in enumerate(_slices(trace)):
        hat = fft_values(grid, vals)
        for idx in bank.active(_support_hint(hat)):
            acc = accs.get(idx)
            if acc is None:
                acc = accs[idx] = CubeAccumulator(partition, p_time, r_space)
            acc.add(bank.block_values(idx, hat), w[m])
        count += 1
    if count != tgrid.steps + 1:
        raise ContractError("trace length does not match time grid")
    terms = {idx: bank.weight(idx, s) * float(lp_sum(acc.cube_norms(), q_outer)) for idx, acc in accs.items()}
    value = float(sum(terms.values()))
    if bank.kind == UNIFORM:
        outer = [k for k in terms if max(abs(c) for c in k) >= bank.K - 1]
    else:
        outer = bank.indices[-2:]
    kind = "l1s_box" if bank.kind == UNIFORM else "l1s_delta"
    return NormReport(kind, {"s": s, "q": q_outer, "p_time": p_time, "r_space": r_space},
                      value, _tail_fraction(terms, outer))


def _support_hint(hat: np.ndarray, rel: float = 1e-15) -> np.ndarray:
    """Zero out coefficients at round-off level so block activity reflects real content."""
    scale = float(np.max(np.abs(hat))) if hat.size else 0.0
    return np.where(np.abs(hat) > rel * scale, hat, 0)


def composite_block_cube_norm_reference(trace, tgrid, s, bank, q_outer, p_time, r_space) -> float:
    """Block-outer loop ordering over the full trace; used to cross-check the streaming form."""
    grid = bank.grid
    partition = CubePartition(grid)
    arr = np.asarray(trace)
    hats = fft_values(grid, arr)
    total = 0.0
    for idx in bank.indices:
        mult = bank.multiplier(idx)
        if not np.any(mult * np.abs(hats).max(axis=0) > 0):
            continue
        blocks = ifft_values(grid, mult * hats)
        per = cube_norms(blocks, tgrid, p_time, r_space, partition)
        total += bank.weight(idx, s) * float(lp_sum(per, q_outer))
    return total


# -- 1D solution-space norm --------------------------------------------------

def x_norm_s_range(m: int, M: int) -> tuple[float, float]:
    if m < 4 or M < m:
        raise ContractError("the 1D solution norm needs M >= m >= 4")
    lo = index_pair(m)[1] if m == 4 else index_pair(m)[0]
    return lo, index_pair(M)[1]


def _block_pieces(block: np.ndarray, tgrid: TimeGrid, grid: FrequencyGrid, m: int, M: int) -> np.ndarray:
    a = np.abs(block)
    energy = float(np.max(lp_sum(a, 2, grid.cell_volume, axis=1)))
    l6 = space_time_norm_xt(a, tgrid, 6, 6, grid)
    smoothing = space_time_norm_xt(a, tgrid, INF, 2, grid)
    max_m = space_time_norm_xt(a, tgrid, m, INF, grid)
    max_big = space_time_norm_xt(a, tgrid, M, INF, grid)
    return np.array([max(energy, l6), smoothing, max_m, max_big])


def x_norm_1d(trace: np.ndarray, tgrid: TimeGrid, grid: FrequencyGrid, m: int, M: int,
              s: float | None = None, s_points: int = 17, bank: DecompositionBank | None = None) -> float:
    """The 1D solution norm built from |||Delta_j v|||_s over homogeneous blocks.

    With ``s`` given the block sum is evaluated at that s; otherwise the sup
    over the admissible s-range is taken on ``s_points`` uniform samples.
    L^inf_t L^2_x and L^6_{x,t} pieces are combined by max (the norm of the
    intersection space).
    """
    if grid.dim != 1:
        raise ContractError("x_norm_1d needs a 1D grid")
    lo, hi = x_norm_s_range(m, M)
    if s is not None and not (lo - 1e-12 <= s <= hi + 1e-12):
        raise ContractError(f"s={s} outside admissible range [{lo}, {hi}]")
    trace = np.asarray(trace)
    if trace.shape[0] != tgrid.steps + 1:
        raise ContractError("trace length does not match time grid")
    bank = bank or DecompositionBank(grid, HOMOGENEOUS)
    st_m, st_M = index_pair(m)[1], index_pair(M)[1]
    hats = fft_values(grid, trace)
    pieces = []
    for i in (0, 1):
        h = hats if i == 0 else hats * (1j * np.where(grid.nyquist_mask, 0, grid.xi[0]))
        scale = float(np.abs(h).max()) if h.size else 0.0
        for j in bank.indices:
            mult = bank.multiplier(j)
            if scale == 0 or not np.any(np.abs(mult * h) > 1e-15 * scale):
                continue
            block = ifft_values(grid, mult * h)
            pieces.append((j, _block_pieces(block, tgrid, grid, m, M)))

    def triple(sv: float) -> float:
        tot = 0.0
        for j, (a, b, c, d) in pieces:
            tot += 2.0 ** (sv * j) * (a + 2.0 ** (j / 2) * b)
            tot += 2.0 ** ((sv - st_m) * j) * c + 2.0 ** ((sv - st_M) * j) * d
        return tot

    svals = [s] if s is not None else np.linspace(lo, hi, s_points)
    value = max(triple(sv) for sv in svals)
    if m == 4:
        for i in (0, 1):
            v = trace if i == 0 else derivative_values(grid, trace, 0)
            a = np.abs(v)
            energy = float(np.max(lp_sum(a, 2, grid.cell_volume, axis=1)))
            value += max(energy, space_time_norm_xt(a, tgrid, 6, 6, grid))
    return float(value)


# -- Gagliardo-Nirenberg on a cube -------------------------------------------

def _multi_indices(dim: int, order: int):
    return [b for b in itertools.product(range(order + 1), repeat=dim) if sum(b) == order]


def _derivative(grid: FrequencyGrid, values: np.ndarray, beta) -> np.ndarray:
    out = values
    for axis, count in enumerate(beta):
        for _ in range(count):
            out = derivative_values(grid, out, axis)
    return out


def gagliardo_nirenberg_check(u: SpectralField, ell: int, m: int, theta: float, p: float, q: float,
                              r: float, alpha, partition: CubePartition | None = None) -> float:
    """LHS / RHS of the interpolation inequality restricted to the cube Q_alpha."""
    n = u.grid.dim
    inv = lambda e: 0.0 if e == INF else 1.0 / e  # noqa: E731
    lhs_exp = inv(p) - ell / n
    rhs_exp = theta * (inv(r) - m / n) + (1 - theta) * inv(q)
    if abs(lhs_exp - rhs_exp) > 1e-12:
        raise ContractError("exponent relation 1/p - l/n = theta(1/r - m/n) + (1-theta)/q violated")
    if m > 0 and not (ell / m - 1e-12 <= theta <= 1 + 1e-12):
        raise ContractError("need l/m <= theta <= 1")
    partition = partition or CubePartition(u.grid)
    mask = partition.mask(alpha)
    vals = u.physical().values
    h = u.grid.cell_volume

    def cube_norm(v, e):
        return float(lp_sum(v[mask], e, h))

    lhs = sum(cube_norm(_derivative(u.grid, vals, b), p) for b in _multi_indices(n, ell))
    sob = sum(cube_norm(_derivative(u.grid, vals, b), r)
              for order in range(m + 1) for b in _multi_indices(n, order))
    rhs = cube_norm(vals, q) ** (1 - theta) * sob ** theta
    if lhs == 0:
        return 0.0
    return lhs / rhs if rhs > 0 else INF
