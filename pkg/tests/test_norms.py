import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dnls.decomp import DYADIC, HOMOGENEOUS, UNIFORM, DecompositionBank, uniform_multiplier
from dnls.grid import (FREQUENCY, ContractError, FrequencyGrid, SpectralField, derivative_values,
                       gaussian_packet, random_band_limited)
from dnls.nonlinearity import dilate
from dnls.norms import (INF, CubePartition, besov_norm, besov_report, composite_block_cube_norm,
                        composite_block_cube_norm_reference, cube_mixed_norm, cube_norms, embedding_table,
                        gagliardo_nirenberg_check, homogeneous_besov_norm_1d, index_pair, lebesgue_norm,
                        modulation_norm, sobolev_norm, space_time_norm, x_norm_1d)
from dnls.propagator import Propagator, TimeGrid

seeds = st.integers(0, 10 ** 6)
G1 = FrequencyGrid(1, 128, 8.0)
G2 = FrequencyGrid(2, 32, 4.0)


def _quiet(fn, *a):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*a)


def _mode(grid, idx, amp=1.0):
    """Lattice mode with frequency label ``idx`` (integer multiples of dxi)."""
    phase = sum(k * grid.dxi * x for k, x in zip(idx, grid.x))
    return SpectralField(grid, amp * np.exp(1j * phase))


# -- Lebesgue and Sobolev -----------------------------------------------------

@pytest.mark.parametrize("grid", [G1, G2])
def test_lebesgue_constant_and_peak(grid):
    one = SpectralField(grid, np.ones(grid.shape))
    assert np.isclose(lebesgue_norm(one, 2), (2 * grid.half_length) ** (grid.dim / 2), rtol=1e-12)
    assert lebesgue_norm(gaussian_packet(grid, 0.0, 0.5), INF) == 1.0
    with pytest.raises(ContractError):
        lebesgue_norm(one, 0.5)


@given(seeds)
def test_lebesgue_plancherel(seed):
    f = random_band_limited(G2, seed, G2.nyquist)
    assert abs(lebesgue_norm(f, 2) / f.frequency().l2() - 1) < 1e-10


@given(seeds, st.floats(-2, 2))
def test_sobolev_zero_is_l2(seed, s):
    f = random_band_limited(G2, seed, 4.0)
    assert abs(sobolev_norm(f, 0.0) / lebesgue_norm(f, 2) - 1) < 1e-12


@pytest.mark.parametrize("s", [-1.0, 0.5, 2.0])
def test_sobolev_pure_mode(s):
    f = _mode(G2, (3, -2), 0.7)
    xi2 = (9 + 4) * G2.dxi ** 2
    expect = (1 + xi2) ** (s / 2) * 0.7 * (2 * G2.half_length) ** (G2.dim / 2)
    assert np.isclose(sobolev_norm(f, s), expect, rtol=1e-12)


def test_sobolev_h1_quadrature():
    g = FrequencyGrid(2, 128, 16.0)
    f = gaussian_packet(g, 0.0, 2.0)
    grad2 = sum(np.abs(derivative_values(g, f.values, a)) ** 2 for a in range(2))
    direct = np.sqrt(np.sum(np.abs(f.values) ** 2 + grad2) * g.cell_volume)
    assert abs(sobolev_norm(f, 1.0) / direct - 1) < 1e-8


def test_homogeneous_negative_needs_mean_zero():
    f = random_band_limited(G2, 0, 3.0)
    with pytest.raises(ContractError):
        sobolev_norm(f, -0.5, homogeneous=True)


# -- Besov and modulation -------------------------------------------------------

def test_block_norms_of_zero():
    z = SpectralField(G2, np.zeros(G2.shape))
    assert besov_norm(z, 1.0, 2, 1) == 0 and modulation_norm(z, 1.0, 2, 1) == 0
    assert homogeneous_besov_norm_1d(SpectralField(G1, np.zeros(G1.shape)), 0.5) == 0


@pytest.mark.parametrize("p", [2.0, 4.0, INF])
def test_besov_pure_mode(p):
    g = FrequencyGrid(2, 64, 2 * np.pi)  # dxi = 1/2, so |xi| = 4 is on the lattice
    f = _mode(g, (8, 0), 1.3)
    s, j0 = 0.7, 2
    lp = 1.3 * (2 * g.half_length) ** (g.dim / p if p != INF else 0)
    assert np.isclose(besov_norm(f, s, p, 1.0), 2 ** (s * j0) * lp, rtol=1e-10)


@pytest.mark.parametrize("p", [2.0, 4.0])
def test_modulation_pure_mode(p):
    # 1D: the mode at integer k0 is interior to sigma_k0 (sigma_k0(k0) = 1)
    g = FrequencyGrid(1, 64, np.pi)
    f = _mode(g, (5,), 2.0)
    lp = 2.0 * (2 * g.half_length) ** (1 / p)
    assert np.isclose(modulation_norm(f, 1.5, p, 1.0), (1 + 25) ** 0.75 * lp, rtol=1e-10)
    # 2D: no lattice point sees a single block, so sum the weights of every block that does
    g2 = FrequencyGrid(2, 32, np.pi)
    f2 = _mode(g2, (2, 3), 1.0)
    xi0 = np.array([2.0, 3.0])
    weights = sum((1 + k0 * k0 + k1 * k1) ** 0.5 * uniform_multiplier((k0, k1), xi0)
                  for k0 in range(-1, 6) for k1 in range(0, 7))
    lp2 = (2 * g2.half_length) ** (2 / p)
    assert np.isclose(modulation_norm(f2, 1.0, p, 1.0), weights * lp2, rtol=1e-10)


@pytest.mark.parametrize("grid", [FrequencyGrid(1, 256, 8.0), FrequencyGrid(2, 64, 8.0)])
def test_l2_equivalence_constants(grid):
    # sum_j phi_j^2 lies in [1/2, 1]; for the uniform bank at most 3^n blocks overlap
    for seed in range(5):
        f = random_band_limited(grid, seed, grid.nyquist / 2)
        b = _quiet(besov_norm, f, 0, 2, 2) / f.l2()
        m = _quiet(modulation_norm, f, 0, 2, 2) / f.l2()
        assert 2 ** -0.5 <= b <= 1 + 1e-12
        assert 3 ** (-grid.dim / 2) <= m <= 1 + 1e-12


def test_homogeneous_besov_pure_mode():
    g = FrequencyGrid(1, 64, np.pi)
    f = _mode(g, (3,), 1.5)
    coeff = np.sqrt(np.sum(np.abs(f.frequency().values) ** 2) * g.dxi)
    assert np.isclose(homogeneous_besov_norm_1d(f, 0.4), 2 ** 0.4 * coeff, rtol=1e-12)


@pytest.mark.parametrize("s", [0.0, 0.5, 1.0])
def test_homogeneous_besov_dilation(s):
    g = FrequencyGrid(1, 2048, 16 * np.pi)
    f = gaussian_packet(g, 0.0, 2.0, 3.0)
    ratio = homogeneous_besov_norm_1d(dilate(f, 2.0), s) / homogeneous_besov_norm_1d(f, s)
    assert abs(ratio / 2 ** (s - 0.5) - 1) < 0.02


def test_embedding_table_constant():
    g = FrequencyGrid(2, 32, 8.0)
    fields = [random_band_limited(g, s, 5.0) for s in range(50)]
    rows = _quiet(embedding_table, fields)
    ratios = np.array([r["ratio"] for r in rows])
    assert np.all(np.isfinite(ratios)) and ratios.max() < 10 * ratios.min()


def test_tail_fraction_flags_unresolved_data():
    g = FrequencyGrid(2, 32, 8.0)
    with pytest.warns(UserWarning, match="tail"):
        rep = besov_report(random_band_limited(g, 0, g.nyquist), 1.0, 2, 1)
    assert rep.tail_fraction > 0.01
    assert besov_report(random_band_limited(g, 0, 1.0), 1.0, 2, 1).tail_fraction == 0


# -- properties ---------------------------------------------------------------

def _all_norms(f):
    return [lebesgue_norm(f, 2), lebesgue_norm(f, 4), lebesgue_norm(f, INF), sobolev_norm(f, 1.0),
            besov_norm(f, 0.5, 2, 1), besov_norm(f, 0.5, 4, 2), modulation_norm(f, 0.5, 2, 1)]


@given(seeds, st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_homogeneity(seed, c):
    f = random_band_limited(G2, seed, 4.0)
    for a, b in zip(_all_norms(f * c), _all_norms(f)):
        assert abs(a - abs(c) * b) <= 1e-12 * max(abs(c) * b, 1e-300) + 1e-300


@given(seeds, seeds)
def test_triangle(s1, s2):
    f, h = random_band_limited(G2, s1, 4.0), random_band_limited(G2, s2, 2.0, 1.0)
    for a, b, c in zip(_all_norms(f + h), _all_norms(f), _all_norms(h)):
        assert a <= b + c + 1e-10


@given(seeds)
def test_block_sum_consistency(seed):
    f = random_band_limited(G2, seed, 4.0)
    assert besov_norm(f, 0, 2, 1) >= f.l2() * (1 - 1e-12)
    vals = [modulation_norm(f, s, 2, 1) for s in (1.0, 0.5, 0.0, -0.5)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


# -- space-time norms -------------------------------------------------------------

def test_cube_partition_guard():
    with pytest.raises(ContractError):
        CubePartition(FrequencyGrid(1, 64, np.pi))
    part = CubePartition(FrequencyGrid(2, 32, 4.0))
    assert part.count == 64 and part.sizes.sum() == 32 * 32


@pytest.mark.parametrize("q,p,r", [(1, 2, 2), (2, 4, 3), (INF, 2, 6), (3, INF, INF)])
def test_cube_mixed_constant(q, p, r):
    g, tg, c = FrequencyGrid(2, 32, 4.0), TimeGrid(2.0, 8), 1.5 - 2j
    trace = np.full((9,) + g.shape, c)
    cubes = (2 * g.half_length) ** 2
    expect = abs(c) * (tg.t_end ** (1 / p) if p != INF else 1) * (cubes ** (1 / q) if q != INF else 1)
    assert np.isclose(cube_mixed_norm(trace, tg, q, p, r, grid=g), expect, rtol=1e-12)


def test_cube_single_support_and_global_l2():
    g, tg = FrequencyGrid(2, 32, 4.0), TimeGrid(1.0, 8)
    part = CubePartition(g)
    rng = np.random.default_rng(0)
    trace = rng.standard_normal((9,) + g.shape) * part.mask((1, -2))
    norms = cube_norms(trace, tg, 3, 4, part)
    assert np.count_nonzero(norms) == 1
    assert np.isclose(cube_mixed_norm(trace, tg, 1, 3, 4, partition=part), norms.max())
    full = rng.standard_normal((9,) + g.shape)
    assert abs(cube_mixed_norm(full, tg, 2, 2, 2, grid=g) / space_time_norm(full, tg, 2, 2, g) - 1) < 1e-10


def test_composite_reductions():
    g, tg = FrequencyGrid(2, 32, 8.0), TimeGrid(1.0, 8)
    prop = Propagator(g)
    low = prop.free_trace(random_band_limited(g, 2, 0.9), tg.nodes)  # only Delta_0 sees it, with weight 1
    bank = DecompositionBank(g, DYADIC)
    assert np.isclose(composite_block_cube_norm(low, tg, 0.0, bank, INF, 2, 2),
                      cube_mixed_norm(low, tg, INF, 2, 2, grid=g), rtol=1e-12)
    assert composite_block_cube_norm(np.zeros_like(low), tg, 1.0, bank, 1, 2, 2) == 0


@pytest.mark.parametrize("kind", [DYADIC, UNIFORM])
def test_composite_two_loop_orders(kind):
    g, tg = FrequencyGrid(2, 32, 8.0), TimeGrid(1.0, 8)
    trace = Propagator(g).free_trace(gaussian_packet(g, 0.0, 1.0), tg.nodes)
    bank = DecompositionBank(g, kind)
    a = composite_block_cube_norm(trace, tg, 0.5, bank, INF, 2, 2)
    b = composite_block_cube_norm_reference(trace, tg, 0.5, bank, INF, 2, 2)
    assert abs(a / b - 1) < 1e-8


def test_x_norm_single_block_closed_form():
    # one lattice mode at |xi| = 4 = 2^2 sees only the homogeneous block j = 2
    g, tg = FrequencyGrid(1, 64, np.pi), TimeGrid(0.5, 16)
    c0, m, s = 0.3, 5, 0.2
    trace = Propagator(g).free_trace(_mode(g, (4,), c0), tg.nodes)
    L2, T = 2 * np.pi, 0.5
    st_m = index_pair(m)[1]
    a = max(c0 * np.sqrt(L2), c0 * (L2 * T) ** (1 / 6))
    b = c0 * np.sqrt(T)
    cm = c0 * L2 ** (1 / m)
    one = 2 ** (2 * s) * (a + 2 * b) + 2 * 2 ** (2 * (s - st_m)) * cm
    expect = one * (1 + 4)  # the derivative block is the same mode times 4
    assert np.isclose(x_norm_1d(trace, tg, g, m, m, s=s), expect, rtol=1e-10)
    assert x_norm_1d(np.zeros_like(trace), tg, g, m, m) == 0


def test_x_norm_monotone_in_window():
    g = FrequencyGrid(1, 128, 16.0)
    prop = Propagator(g)
    u0 = gaussian_packet(g, 0.0, 1.0, 2.0)
    tg = TimeGrid(0.5, 16)
    short = x_norm_1d(prop.free_trace(u0, tg.nodes), tg, g, 4, 6)
    long_tg = tg.extended(2)
    assert x_norm_1d(prop.free_trace(u0, long_tg.nodes), long_tg, g, 4, 6) >= short
    with pytest.raises(ContractError):
        x_norm_1d(prop.free_trace(u0, tg.nodes), tg, g, 3, 6)


# -- Gagliardo-Nirenberg -----------------------------------------------------------

def test_gn_trivial_cases():
    g = FrequencyGrid(2, 64, 4.0)
    const = SpectralField(g, np.full(g.shape, 2.0))
    assert gagliardo_nirenberg_check(const, 1, 2, 0.75, 4, 2, 2, (0, 0)) == 0
    f = random_band_limited(g, 0, 4.0)
    assert gagliardo_nirenberg_check(f, 1, 1, 1.0, 3, 7, 3, (1, 0)) <= 1 + 1e-10
    with pytest.raises(ContractError):
        gagliardo_nirenberg_check(f, 1, 2, 0.3, 4, 2, 2, (0, 0))


def test_gn_ensemble_refinement():
    g = FrequencyGrid(2, 32, 4.0)

    def worst(grid):
        return max(gagliardo_nirenberg_check(random_band_limited(grid, s, 4.0), 1, 2, 0.75, 4, 2, 2, (0, 0))
                   for s in range(100))

    a, b = worst(g), worst(g.refined(2))
    assert np.isfinite(a) and abs(b / a - 1) < 0.10
