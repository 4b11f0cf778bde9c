"""Periodic-box grids, spectral fields and Fourier plumbing.

The box is ``[-L, L)^n`` sampled at ``N`` points per axis. Frequency-space
values approximate the continuum transform

    F f(xi) = (2 pi)^{-n/2} \\int f(x) e^{-i x.xi} dx

so that ``sum |F f|^2 dxi^n == sum |f|^2 h^n`` holds exactly (Plancherel).
Arrays are kept in numpy FFT ordering on the frequency side.
"""
from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

PHYSICAL = "physical"
FREQUENCY = "frequency"
_REP_TAGS = {PHYSICAL: 0, FREQUENCY: 1}

SNAPSHOT_MAGIC = b"DNLS"
SNAPSHOT_VERSION = 1


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


@dataclass(frozen=True)
class FrequencyGrid:
    dim: int
    points: int
    half_length: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ContractError(f"dimension must be 1 or 2, got {self.dim}")
        if self.points < 2 or self.points % 2:
            raise ContractError(f"points per axis must be even, got {self.points}")
        if not self.half_length > 0:
            raise ContractError("half_length must be positive")

    @classmethod
    def default(cls, dim: int) -> "FrequencyGrid":
        if dim == 1:
            return cls(1, 256, 16 * np.pi)
        return cls(2, 128, 8 * np.pi)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def spacing(self) -> float:
        return 2 * self.half_length / self.points

    @property
    def dxi(self) -> float:
        return np.pi / self.half_length

    @property
    def nyquist(self) -> float:
        return self.points / 2 * self.dxi

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def frequency_cell(self) -> float:
        return self.dxi ** self.dim

    @cached_property
    def x1d(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.points)

    @cached_property
    def xi1d(self) -> np.ndarray:
        return np.fft.fftfreq(self.points, d=1.0 / self.points) * self.dxi

    @cached_property
    def x(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.x1d] * self.dim), indexing="ij"))

    @cached_property
    def xi(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.xi1d] * self.dim), indexing="ij"))

    @cached_property
    def xi_norm(self) -> np.ndarray:
        return np.sqrt(sum(k ** 2 for k in self.xi))

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on lattice points that lie on a Nyquist row of some axis."""
        edge = np.zeros(self.shape, dtype=bool)
        for k in self.xi:
            edge |= np.isclose(k, -self.nyquist)
        return edge

    @cached_property
    def _phase(self) -> np.ndarray:
        # x starts at -L, not 0; this factor makes the DFT approximate F.
        return np.exp(1j * self.half_length * sum(self.xi))

    def refined(self, factor: int = 2) -> "FrequencyGrid":
        return FrequencyGrid(self.dim, self.points * factor, self.half_length)

    def enlarged(self, factor: int = 2) -> "FrequencyGrid":
        return FrequencyGrid(self.dim, self.points * factor, self.half_length * factor)


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: FrequencyGrid
    values: np.ndarray
    rep: str = PHYSICAL

    def __post_init__(self):
        if self.rep not in _REP_TAGS:
            raise ContractError(f"unknown representation {self.rep!r}")
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ContractError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ContractError("field contains NaN or Inf")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def physical(self) -> "SpectralField":
        return self if self.rep == PHYSICAL else inverse_transform(self)

    def frequency(self) -> "SpectralField":
        return self if self.rep == FREQUENCY else forward_transform(self)

    def with_values(self, values) -> "SpectralField":
        return SpectralField(self.grid, values, self.rep)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        other = _match(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        other = _match(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "SpectralField":
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return self.with_values(-self.values)

    def l2(self) -> float:
        w = self.grid.cell_volume if self.rep == PHYSICAL else self.grid.frequency_cell
        return l2_sum(self.values, w)


def l2_sum(values: np.ndarray, weight: float = 1.0) -> float:
    """sqrt(weight * sum |v|^2), scaled by the max so tiny or huge values survive."""
    a = np.abs(values)
    top = float(a.max(initial=0.0))
    if top == 0:
        return 0.0
    return float(top * np.sqrt(np.sum((a / top) ** 2) * weight))


def _match(a: SpectralField, b: SpectralField) -> SpectralField:
    if a.grid != b.grid:
        raise ContractError("grid mismatch")
    return b if b.rep == a.rep else (b.physical() if a.rep == PHYSICAL else b.frequency())


def fft_values(grid: FrequencyGrid, values: np.ndarray, axes=None) -> np.ndarray:
    """Continuum-normalized transform of physical samples (batched over leading axes)."""
    axes = tuple(range(-grid.dim, 0)) if axes is None else axes
    scale = grid.cell_volume / (2 * np.pi) ** (grid.dim / 2)
    return np.fft.fftn(values, axes=axes) * (grid._phase * scale)


def ifft_values(grid: FrequencyGrid, values: np.ndarray, axes=None) -> np.ndarray:
    axes = tuple(range(-grid.dim, 0)) if axes is None else axes
    scale = grid.cell_volume / (2 * np.pi) ** (grid.dim / 2)
    return np.fft.ifftn(values / (grid._phase * scale), axes=axes)


def forward_transform(f: SpectralField) -> SpectralField:
    if f.rep != PHYSICAL:
        raise ContractError("forward_transform expects a physical-space field")
    return SpectralField(f.grid, fft_values(f.grid, f.values), FREQUENCY)


def inverse_transform(f: SpectralField) -> SpectralField:
    if f.rep != FREQUENCY:
        raise ContractError("inverse_transform expects a frequency-space field")
    return SpectralField(f.grid, ifft_values(f.grid, f.values), PHYSICAL)


def derivative_values(grid: FrequencyGrid, values: np.ndarray, axis: int) -> np.ndarray:
    """Spectral d/dx_axis of physical samples; the Nyquist row is zeroed."""
    if not 0 <= axis < grid.dim:
        raise ContractError(f"axis {axis} out of range for dimension {grid.dim}")
    k = np.where(grid.nyquist_mask, 0.0, grid.xi[axis])
    axes = tuple(range(-grid.dim, 0))
    return np.fft.ifftn(1j * k * np.fft.fftn(values, axes=axes), axes=axes)


def spectral_derivative(f: SpectralField, axis: int) -> SpectralField:
    grid = f.grid
    if not 0 <= axis < grid.dim:
        raise ContractError(f"axis {axis} out of range for dimension {grid.dim}")
    if f.rep == FREQUENCY:
        k = np.where(grid.nyquist_mask, 0.0, grid.xi[axis])
        return f.with_values(1j * k * f.values)
    return f.with_values(derivative_values(grid, f.values, axis))


def random_band_limited(grid: FrequencyGrid, seed: int, band: float, decay: float = 0.0) -> SpectralField:
    """Complex Gaussian Fourier coefficients with envelope <xi>^-decay, cut at |xi| <= band.

    Coefficients are drawn only for in-band lattice modes, in lexicographic
    order of their integer labels, so a seed gives the same datum on every
    grid sharing the box length (refining N leaves it unchanged).
    """
    if band > grid.nyquist:
        raise ContractError(f"band {band} exceeds Nyquist {grid.nyquist}")
    rng = np.random.default_rng(seed)
    kmax = int(np.floor(band / grid.dxi))
    labels = np.arange(-kmax, kmax + 1)
    mesh = np.meshgrid(*([labels] * grid.dim), indexing="ij")
    modes = np.stack([m.ravel() for m in mesh], axis=-1)
    r = np.sqrt(np.sum((modes * grid.dxi) ** 2, axis=-1))
    keep = r <= band
    modes, r = modes[keep], r[keep]
    draw = rng.standard_normal((len(modes), 2))
    coeff = (draw[:, 0] + 1j * draw[:, 1]) / np.sqrt(2)
    # unit-variance coefficients in continuum units: E|F f|^2 = env^2 / dxi^n
    coeff = coeff * (1 + r ** 2) ** (-decay / 2) / np.sqrt(grid.frequency_cell)
    hat = np.zeros(grid.shape, dtype=complex)
    hat[tuple(np.mod(modes, grid.points).T)] = coeff
    return inverse_transform(SpectralField(grid, hat, FREQUENCY))


def envelope(grid: FrequencyGrid, band: float, decay: float) -> np.ndarray:
    r = grid.xi_norm
    return np.where(r <= band, (1 + r ** 2) ** (-decay / 2), 0.0)


def gaussian_packet(grid: FrequencyGrid, center=0.0, width: float = 1.0, carrier=0.0) -> SpectralField:
    """Samples of exp(i xi0.x) exp(-|x - x0|^2 / (2 sigma^2))."""
    if width > grid.half_length / 4:
        warnings.warn("packet width exceeds L/4; periodization error may be visible", stacklevel=2)
    x0 = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    k0 = np.broadcast_to(np.asarray(carrier, dtype=float), (grid.dim,))
    r2 = sum((x - c) ** 2 for x, c in zip(grid.x, x0))
    phase = sum(k * x for k, x in zip(k0, grid.x))
    return SpectralField(grid, np.exp(1j * phase - r2 / (2 * width ** 2)))


# -- binary snapshots -------------------------------------------------------

_HEADER = struct.Struct("<4sIIIdB")


def write_snapshot(path, f: SpectralField, signature=None) -> None:
    grid = f.grid
    signs = [1] * grid.dim if signature is None else [int(s) for s in signature]
    if len(signs) != grid.dim:
        raise ContractError("signature length must match grid dimension")
    head = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, grid.dim, grid.points,
                        grid.half_length, _REP_TAGS[f.rep])
    payload = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(struct.pack(f"<{grid.dim}b", *signs))
        fh.write(payload)


def read_snapshot(path) -> tuple[SpectralField, tuple[int, ...]]:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, dim, points, half_length, tag = _HEADER.unpack_from(raw, 0)
    if magic != SNAPSHOT_MAGIC:
        raise ContractError("not a DNLS snapshot")
    if version != SNAPSHOT_VERSION:
        raise ContractError(f"unsupported snapshot version {version}")
    off = _HEADER.size
    signs = struct.unpack_from(f"<{dim}b", raw, off)
    off += dim
    grid = FrequencyGrid(dim, points, half_length)
    count = points ** dim
    vals = np.frombuffer(raw, dtype="<c16", count=count, offset=off).reshape(grid.shape)
    rep = PHYSICAL if tag == 0 else FREQUENCY
    return SpectralField(grid, vals.copy(), rep), tuple(signs)
