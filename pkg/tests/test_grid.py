import numpy as np
import pytest
from hypothesis import given, strategies as st

from dnls.grid import (FREQUENCY, ContractError, FrequencyGrid, SpectralField, envelope, gaussian_packet,
                       random_band_limited, read_snapshot, spectral_derivative, write_snapshot)

from conftest import rel

seeds = st.integers(0, 2 ** 31 - 1)


def test_grid_contract():
    with pytest.raises(ContractError):
        FrequencyGrid(1, 63, 1.0)
    with pytest.raises(ContractError):
        FrequencyGrid(3, 8, 1.0)
    with pytest.raises(ContractError):
        FrequencyGrid(1, 8, 0.0)
    g = FrequencyGrid(2, 16, 4.0)
    assert g.spacing == 0.5 and g.cell_volume == 0.25
    assert np.isclose(g.nyquist, 8 * np.pi / 4)


def test_nan_rejected(grid1):
    v = np.zeros(grid1.shape, complex)
    v[3] = np.nan
    with pytest.raises(ContractError):
        SpectralField(grid1, v)


def test_constant_has_one_mode(grid2):
    f = SpectralField(grid2, np.full(grid2.shape, 2.5)).frequency()
    mask = grid2.xi_norm == 0
    assert np.abs(f.values[~mask]).max() < 1e-12 * np.abs(f.values[mask]).max()


@pytest.mark.parametrize("m", [1, -3, 7])
def test_pure_mode(grid1, m):
    xi0 = m * grid1.dxi
    f = SpectralField(grid1, np.exp(1j * xi0 * grid1.x[0])).frequency()
    peak = np.argmax(np.abs(f.values))
    assert np.isclose(grid1.xi1d[peak], xi0)
    others = np.delete(np.abs(f.values), peak)
    assert others.max() < 1e-12 * np.abs(f.values[peak])
    # continuum normalization: amplitude (2L) / sqrt(2 pi) over one lattice cell
    assert np.isclose(np.abs(f.values[peak]), 2 * grid1.half_length / np.sqrt(2 * np.pi))


def test_zero_roundtrip(grid2):
    z = SpectralField(grid2, np.zeros(grid2.shape))
    assert np.all(z.frequency().physical().values == 0)


def test_inverse_of_single_mode(grid1):
    hat = np.zeros(grid1.shape, complex)
    hat[5] = 1.0
    f = SpectralField(grid1, hat, FREQUENCY).physical()
    expect = np.exp(1j * grid1.xi1d[5] * grid1.x[0])
    ratio = f.values / expect
    assert np.ptp(np.abs(ratio)) < 1e-12 and np.ptp(np.angle(ratio)) < 1e-12


@given(seeds, st.sampled_from([1, 2]))
def test_plancherel_and_roundtrip(seed, dim):
    g = FrequencyGrid(dim, 64 if dim == 1 else 16, 4.0)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    f = SpectralField(g, v)
    hat = f.frequency()
    assert abs(hat.l2() / f.l2() - 1) < 1e-12
    assert rel(hat.physical().values, v) < 1e-12


def test_derivative_exact_on_modes(grid1):
    g = FrequencyGrid(1, 128, np.pi)  # contains xi = 1, 2
    x = g.x[0]
    d = spectral_derivative(SpectralField(g, np.exp(1j * x)), 0)
    assert np.abs(d.values - 1j * np.exp(1j * x)).max() < 1e-10
    d2 = spectral_derivative(SpectralField(g, np.sin(2 * x)), 0)
    assert np.abs(d2.values - 2 * np.cos(2 * x)).max() < 1e-10
    c = spectral_derivative(SpectralField(grid1, np.full(grid1.shape, 3.0)), 0)
    assert np.abs(c.values).max() < 1e-12


def test_derivative_in_frequency_rep(grid2):
    f = random_band_limited(grid2, 3, 4.0)
    a = spectral_derivative(f, 1).values
    b = spectral_derivative(f.frequency(), 1).physical().values
    assert rel(a, b) < 1e-12
    with pytest.raises(ContractError):
        spectral_derivative(f, 2)


@given(seeds, st.floats(0.5, 6.0), st.floats(0.0, 3.0))
def test_random_field_contract(seed, band, decay):
    g = FrequencyGrid(2, 32, 4.0)
    a = random_band_limited(g, seed, band, decay)
    b = random_band_limited(g, seed, band, decay)
    assert np.array_equal(a.values, b.values)
    hat = a.frequency().values
    assert np.abs(hat[g.xi_norm > band]).max(initial=0) < 1e-12 * np.abs(hat).max()


def test_random_field_refinement_stable(grid2):
    a = random_band_limited(grid2, 11, 3.0)
    b = random_band_limited(grid2.refined(2), 11, 3.0)
    assert rel(b.values[::2, ::2], a.values) < 1e-12


def test_random_field_band_above_nyquist(grid1):
    with pytest.raises(ContractError):
        random_band_limited(grid1, 0, 2 * grid1.nyquist)


def test_random_field_mean_energy():
    # E ||f||^2 = sum over the lattice of envelope^2 * dxi^n / dxi^n
    g = FrequencyGrid(2, 32, 8.0)
    band, decay = g.nyquist / 2, 1.0
    oracle = np.sum(envelope(g, band, decay) ** 2)
    mean = np.mean([random_band_limited(g, s, band, decay).l2() ** 2 for s in range(100)])
    assert abs(mean / oracle - 1) < 0.10


@pytest.mark.parametrize("dim", [1, 2])
def test_gaussian_mass(dim):
    g = FrequencyGrid(dim, 128, 20.0)
    sigma = g.half_length / 10
    f = gaussian_packet(g, 0.0, sigma)
    assert abs(f.l2() ** 2 / (np.pi * sigma ** 2) ** (dim / 2) - 1) < 1e-6
    assert np.allclose(f.values.imag, 0) and np.all(f.values.real > 0)
    flip = f.values[(slice(1, None),) * dim][(slice(None, None, -1),) * dim]
    assert np.allclose(flip, f.values[(slice(1, None),) * dim])


def test_gaussian_carrier_peak():
    g = FrequencyGrid(2, 64, 16.0)
    k0 = (3 * g.dxi, -5 * g.dxi)
    hat = gaussian_packet(g, (1.0, -2.0), 2.0, k0).frequency().values
    i = np.unravel_index(np.argmax(np.abs(hat)), g.shape)
    assert np.isclose(g.xi[0][i], k0[0]) and np.isclose(g.xi[1][i], k0[1])


def test_snapshot_roundtrip(tmp_path, grid2):
    f = random_band_limited(grid2, 5, 3.0)
    write_snapshot(tmp_path / "u.snap", f, (1, -1))
    h, sig = read_snapshot(tmp_path / "u.snap")
    assert sig == (1, -1) and h.grid == grid2
    assert np.array_equal(h.values, f.values)
    (tmp_path / "bad.snap").write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(ContractError):
        read_snapshot(tmp_path / "bad.snap")
