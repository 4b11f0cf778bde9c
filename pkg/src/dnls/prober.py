"""Empirical LHS/RHS ratios for the linear and multilinear estimates, with refinement checks.

A probe evaluates one inequality over a seeded ensemble at a base setting and
at settings with N, T or the data band doubled. It passes when every ratio is
finite and the ensemble maximum moves by at most the drift threshold under
each doubling.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .decomp import (DYADIC, HOMOGENEOUS, UNIFORM, DecompositionBank, bump_psi, delta_bump,
                     uniform_multiplier)
from .grid import (ContractError, FREQUENCY, FrequencyGrid, SpectralField, derivative_values,
                   fft_values, ifft_values, random_band_limited)
from .norms import (INF, CubePartition, _support_hint, composite_block_cube_norm, cube_mixed_norm, cube_norms,
                    lp_sum, modulation_norm, sobolev_norm, space_time_norm, space_time_norm_xt)
from .propagator import Propagator, TimeGrid, duhamel_trace, fit_loglog_slope

AXES = ("N", "T", "band")


@dataclass(frozen=True)
class Setting:
    grid: FrequencyGrid
    tgrid: TimeGrid
    band: float
    width: float
    signature: tuple

    @property
    def prop(self) -> Propagator:
        return Propagator(self.grid, self.signature)


@dataclass
class ProbeSpec:
    probe: str
    dim: int = 2
    points: int = 128
    half_length: float = 16.0
    t_end: float = 1.0
    steps: int = 64
    band: float = 1.0
    width: float = 1.0
    signature: tuple | None = None
    ensemble: int = 32
    seed: int = 0
    params: dict = field(default_factory=dict)
    doublings: tuple = AXES
    drift_threshold: float = 0.15
    scale_width: bool = True
    decay: float = 0.0
    workers: int = 1

    def __post_init__(self):
        if self.probe not in PROBES:
            raise ContractError(f"unknown probe {self.probe!r}")
        if self.ensemble < 16:
            raise ContractError("ensemble size must be at least 16")
        if not self.doublings or any(a not in AXES for a in self.doublings):
            raise ContractError(f"doublings must be a non-empty subset of {AXES}")
        self.signature = tuple(self.signature) if self.signature is not None else (1,) * self.dim
        self.doublings = tuple(self.doublings)
        _, check = PROBES[self.probe]
        check(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ProbeSpec":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ContractError(f"unknown probe spec fields {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ContractError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["signature"] = list(self.signature)
        d["doublings"] = list(self.doublings)
        return d

    def base(self) -> Setting:
        grid = FrequencyGrid(self.dim, self.points, self.half_length)
        return Setting(grid, TimeGrid(self.t_end, self.steps), self.band, self.width, self.signature)

    def setting(self, axis: str | None) -> Setting:
        b = self.base()
        if axis is None:
            return b
        if axis == "N":
            return replace(b, grid=b.grid.refined(2), tgrid=b.tgrid.refined(2))
        if axis == "T":
            return replace(b, tgrid=b.tgrid.extended(2))
        if axis == "band":
            return replace(b, band=2 * b.band, width=b.width / 2 if self.scale_width else b.width)
        raise ContractError(f"unknown axis {axis!r}")


@dataclass
class ProbeReport:
    probe: str
    spec: dict
    samples: list
    max_ratio: dict
    drift: dict
    verdict: str
    threshold: float
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def ratios(self, resolution: str = "base") -> np.ndarray:
        return np.array([s["ratio"] for s in self.samples if s["resolution"] == resolution])

    def to_dict(self) -> dict:
        return {"probe": self.probe, "spec": self.spec, "samples": self.samples,
                "max_ratio": self.max_ratio, "drift": self.drift, "verdict": self.verdict,
                "threshold": self.threshold, "notes": self.notes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["seed", "resolution", "T", "ratio"])
            for s in self.samples:
                w.writerow([s["seed"], s["resolution"], repr(s["T"]), repr(s["ratio"])])


def verdict_of(max_ratio: dict, drift: dict, threshold: float) -> str:
    if len(max_ratio) < 2:
        return "FAIL"
    if not all(math.isfinite(v) for v in max_ratio.values()):
        return "FAIL"
    return "PASS" if all(abs(d) <= threshold for d in drift.values()) else "FAIL"


# -- ensembles ---------------------------------------------------------------

def localized_datum(grid: FrequencyGrid, seed: int, band: float, width: float, decay: float = 0.0,
                    mean_zero: bool = False, low_damping: bool = False, center=0.0,
                    shell: bool = False, window_last: bool = False) -> SpectralField:
    """Random band-limited field under a Gaussian window, smoothly cut to |xi| <= 2 band.

    By default the window is applied first and the spectral cut last, so the
    datum is exactly band-limited; ``window_last`` reverses the order, which
    keeps the spatial support tight instead.
    ``shell`` keeps only the dyadic annulus band/2 <= |xi| <= 2 band.
    ``low_damping`` multiplies the spectrum by min(|xi|^{1/2}, 1) and implies a
    zero mean; it keeps negative homogeneous norms of the datum finite.
    """
    x0 = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    window = np.exp(-sum((x - c) ** 2 for x, c in zip(grid.x, x0)) / (2 * width ** 2))
    r = grid.xi_norm
    cut = delta_bump(r / band) if shell else bump_psi(r / band)
    if window_last:
        f = random_band_limited(grid, seed, min(2 * band, grid.nyquist), decay)
        hat = fft_values(grid, ifft_values(grid, cut * f.frequency().values) * window)
    else:
        f = random_band_limited(grid, seed, band, decay)
        hat = cut * fft_values(grid, f.values * window)
    if low_damping:
        hat = hat * np.minimum(np.sqrt(r), 1.0)
    if mean_zero or low_damping:
        hat = np.where(r == 0, 0, hat)
    return SpectralField(grid, hat, FREQUENCY).physical()


def _datum(spec: ProbeSpec, st: Setting, seed: int, **kw) -> SpectralField:
    kw.setdefault("shell", bool(spec.params.get("shell", False)))
    kw.setdefault("window_last", bool(spec.params.get("window_last", False)))
    return localized_datum(st.grid, seed, st.band, st.width, spec.decay, **kw)


# -- ratio kernels -------------------------------------------------------------

def strichartz_gamma(p: float, n: int) -> float:
    """Time exponent with 2/gamma = n(1/2 - 1/p)."""
    if p < 2:
        raise ContractError("Strichartz needs p >= 2")
    if n == 2 and p == INF:
        raise ContractError("p = inf is excluded in 2D")
    inv = n * (0.5 - 1.0 / p) / 2
    if inv > 0.5 + 1e-12:
        raise ContractError(f"(p={p}, n={n}) has no admissible time exponent")
    return INF if inv == 0 else 1.0 / inv


def _check_strichartz(spec):
    strichartz_gamma(spec.params.get("p", 2.0), spec.dim)


def strichartz_ratio(spec: ProbeSpec, st: Setting, seed: int) -> float:
    p = spec.params.get("p", 2.0)
    u0 = _datum(spec, st, seed)
    trace = st.prop.free_trace(u0, st.tgrid.nodes)
    return space_time_norm(trace, st.tgrid, strichartz_gamma(p, spec.dim), p, st.grid) / u0.l2()


def _check_none(spec):
    pass


def local_smoothing_ratio(spec: ProbeSpec, st: Setting, seed: int) -> float:
    """sup_alpha ||S(t)u0||_{L^2_{t,x}(Q_alpha)} / ||u0||_{H^-1/2 homogeneous}."""
    u0 = _datum(spec, st, seed, low_damping=True)
    return local_smoothing_value(u0, st) / sobolev_norm(u0, -0.5, homogeneous=True)


def local_smoothing_value(u0: SpectralField, st: Setting) -> float:
    prop = st.prop
    return cube_mixed_norm(prop.iter_free(u0, st.tgrid.nodes), st.tgrid, INF, 2, 2,
                           partition=CubePartition(st.grid))


def resonant_forcing(g: SpectralField, st: Setting, centre: float, duration: float) -> np.ndarray:
    """f(t) = chi(t) S(t) g with a smooth bump chi of the given duration around ``centre``."""
    t = st.tgrid.nodes
    chi = bump_psi(2 * (t - centre) / duration * 2)  # supported in |t - centre| < duration / 2
    trace = st.prop.free_trace(g, t)
    return chi.reshape((-1,) + (1,) * st.grid.dim) * trace


def gradient_magnitude(grid: FrequencyGrid, trace: np.ndarray) -> np.ndarray:
    return np.sqrt(sum(np.abs(derivative_values(grid, trace, ax)) ** 2 for ax in range(grid.dim)))


def inhomogeneous_smoothing_value(f: np.ndarray, st: Setting) -> tuple[float, float]:
    """(sup_alpha ||grad A f||_{L^2(Q_alpha)}, sum_alpha ||f||_{L^2(Q_alpha)})."""
    part = CubePartition(st.grid)
    v = duhamel_trace(f, st.prop, st.tgrid)
    lhs = cube_mixed_norm(gradient_magnitude(st.grid, v), st.tgrid, INF, 2, 2, partition=part)
    rhs = cube_mixed_norm(f, st.tgrid, 1, 2, 2, partition=part)
    return lhs, rhs


def inhomogeneous_smoothing_ratio(spec: ProbeSpec, st: Setting, seed: int) -> float:
    g = _datum(spec, st, seed)
    base = spec.band / st.band
    duration = spec.params.get("duration", 0.25) * base
    f = resonant_forcing(g, st, duration / 2, duration)
    lhs, rhs = inhomogeneous_smoothing_value(f, st)
    if rhs == 0:
        raise ContractError("zero forcing")
    return lhs / rhs


def _check_maximal(spec):
    p = spec.params.get("p", 4.0)
    s = spec.params.get("s", 1.1)
    if p < 2 + 4 / spec.dim:
        raise ContractError(f"maximal estimates need p >= {2 + 4 / spec.dim}")
    if s <= spec.dim / 2:
        raise ContractError("global maximal estimate needs s > n/2")


def maximal_global_ratio(spec: ProbeSpec, st: Setting, seed: int) -> float:
    p, s = spec.params.get("p", 4.0), spec.params.get("s", 1.1)
    u0 = _datum(spec, st, seed)
    lhs = cube_mixed_norm(st.prop.iter_free(u0, st.tgrid.nodes), st.tgrid, p, INF, INF,
                          partition=CubePartition(st.grid))
    return lhs / sobolev_norm(u0, s)


def _check_mixed(spec):
    p, q = spec.params.get("p", 4.0), spec.params.get("q", 4.0)
    s = spec.params.get("s", 0.7)
    floor = 2 + 4 / spec.dim
    if p < floor or q < floor:
        raise ContractError(f"p and q must be >= {floor}")
    if s <= spec.dim / 2 - (0 if q == INF else 2 / q):
        raise ContractError("need s > n/2 - 2/q")


def maximal_mixed_ratio(spec: ProbeSpec, st: Setting, seed: int) -> float:
    p, q, s = spec.params.get("p", 4.0), spec.params.get("q", 4.0), spec.params.get("s", 0.7)
    u0 = _datum(spec, st, seed)
    lhs = cube_mixed_norm(st.prop.iter_free(u0, st.tgrid.nodes), st.tgrid, p, q, INF,
                          partition=CubePartition(st.grid))
    return lhs / sobolev_norm(u0, s)


def _check_uniform(spec):
    p, s = spec.params.get("p", 4.0), spec.params.get("s", 1.1)
    if p < 2 + 4 / spec.dim:
        raise ContractError(f"maximal estimates need p >= {2 + 4 / spec.dim}")
    if s <= (spec.dim + 2) / p:
        raise ContractError("need s > (n+2)/p")


def block_maximal_value(u0: SpectralField, st: Setting, p: float, coarsen: int = 2,
                        bank: DecompositionBank | None = None) -> float:
    """sum_k (sum_alpha ||box_k S(t)u0||^p_{L^inf(I x Q_alpha)})^{1/p}.

    Each block is shifted to the origin by the nearest lattice frequency and
    evaluated on a grid ``coarsen`` times coarser; the modulus is unchanged
    by the shift, and the coarse points are a subset of the fine ones.
    """
    grid = st.grid
    bank = bank or DecompositionBank(grid, UNIFORM)
    if grid.points % coarsen:
        raise ContractError("coarsening factor must divide N")
    M = grid.points // coarsen
    coarse = FrequencyGrid(grid.dim, M, grid.half_length)
    part = CubePartition(coarse)
    hat = _support_hint(u0.frequency().values)
    reach = int(np.ceil(np.sqrt(grid.dim) / grid.dxi)) + 1
    if 2 * reach + 1 > M:
        raise ContractError("block does not fit the coarse grid; lower the coarsening")
    offs = np.arange(-reach, reach + 1)
    t = st.tgrid.nodes.reshape((-1,) + (1,) * grid.dim)
    total = 0.0
    for k in bank.active(hat):
        centre = [int(round(c / grid.dxi)) for c in k]
        labels = [c + offs for c in centre]
        mesh = np.meshgrid(*labels, indexing="ij")
        xis = np.stack([m * grid.dxi for m in mesh], axis=-1)
        coeff = hat[np.ix_(*[np.mod(l, grid.points) for l in labels])]
        coeff = coeff * uniform_multiplier(k, xis)
        sym = sum(e * x ** 2 for e, x in zip(st.signature, np.moveaxis(xis, -1, 0)))
        # only the block's slot is non-zero, so the phase is applied there alone
        slot = (slice(None),) + np.ix_(*([np.mod(offs, M)] * grid.dim))
        spec = np.zeros((len(st.tgrid.nodes),) + (M,) * grid.dim, dtype=complex)
        spec[slot] = np.exp(-1j * t * sym[None]) * coeff[None]
        vals = ifft_values(coarse, spec)
        norms = part.spatial_norms(vals, INF).max(axis=0)
        total += float(lp_sum(norms, p))
    return total


def maximal_uniform_ratio(spec: ProbeSpec, st: Setting, seed: int) -> float:
    p, s = spec.params.get("p", 4.0), spec.params.get("s", 1.1)
    u0 = _datum(spec, st, seed)
    lhs = block_maximal_value(u0, st, p, spec.params.get("coarsen", 2))
    return lhs / modulation_norm(u0, s, 2, 1)


def product_exponents(spec_or_params) -> dict:
    p = spec_or_params if isinstance(spec_or_params, dict) else spec_or_params.params
    K = int(p.get("K", 3))
    e = {"K": K, "s": p.get("s", 0.5), "p1": p.get("p1", 2.0), "q1": p.get("q1", 2.0),
         "p2": p.get("p2", INF), "q2": p.get("q2", INF)}
    e["p"] = p.get("p", 1.0 / (1.0 / e["p1"] + (K - 1) / e["p2"]))
    e["q"] = p.get("q", 1.0 / (1.0 / e["q1"] + (K - 1) / e["q2"]))
    return e


def _check_product(spec):
    e = product_exponents(spec)
    if e["K"] < 1 or e["s"] <= 0:
        raise ContractError("need K >= 1 and s > 0")
    for a, b, c in (("p", "p1", "p2"), ("q", "q1", "q2")):
        if abs(1 / e[a] - (1 / e[b] + (e["K"] - 1) / e[c])) > 1e-12:
            raise ContractError(f"exponent relation 1/{a} = 1/{b} + (K-1)/{c} violated")


def product_value(traces: Sequence[np.ndarray], tgrid: TimeGrid, bank: DecompositionBank,
                  e: dict) -> tuple[float, float]:
    """LHS and RHS of the K-fold product estimate for given space-time traces."""
    part = CubePartition(bank.grid)
    K = len(traces)
    prod = traces[0].copy()
    for tr in traces[1:]:
        prod = prod * tr
    lhs = composite_block_cube_norm(prod, tgrid, e["s"], bank, 1, e["q"], e["p"], part)
    first = [composite_block_cube_norm(tr, tgrid, e["s"], bank, INF, e["q1"], e["p1"], part) for tr in traces]
    other = [composite_block_cube_norm(tr, tgrid, 0.0, bank, max(K - 1, 1), e["q2"], e["p2"], part)
             for tr in traces] if K > 1 else []
    rhs = 0.0
    for k in range(K):
        term = first[k]
        for i in range(K):
            if i != k:
                term *= other[i]
        rhs += term
    return lhs, rhs


def time_window(tgrid: TimeGrid) -> np.ndarray:
    """Smooth bump chi(t/T) supported in (0, T)."""
    return bump_psi(4 * (tgrid.nodes / tgrid.t_end - 0.5))


def product_ratio(spec: ProbeSpec, st: Setting, seed: int) -> float:
    """Random K-tuples: chi(t/T) g_k(x) by default, or free evolutions with ``tuple="free"``."""
    e = product_exponents(spec)
    rng = np.random.default_rng(seed)
    subseeds = rng.integers(0, 2 ** 31, size=e["K"])
    data = [_datum(spec, st, int(s)) for s in subseeds]
    shape = (-1,) + (1,) * st.grid.dim
    if spec.params.get("tuple", "static") == "free":
        traces = [st.prop.free_trace(g, st.tgrid.nodes) for g in data]
    else:
        chi = time_window(st.tgrid).reshape(shape)
        traces = [chi * g.values[None] for g in data]
    lhs, rhs = product_value(traces, st.tgrid, DecompositionBank(st.grid, DYADIC), e)
    return 0.0 if lhs == 0 else lhs / rhs


PROBES: dict[str, tuple[Callable, Callable]] = {
    "strichartz": (strichartz_ratio, _check_strichartz),
    "local_smoothing_free": (local_smoothing_ratio, _check_none),
    "inhomogeneous_smoothing": (inhomogeneous_smoothing_ratio, _check_none),
    "maximal_global": (maximal_global_ratio, _check_maximal),
    "maximal_mixed": (maximal_mixed_ratio, _check_mixed),
    "maximal_uniform": (maximal_uniform_ratio, _check_uniform),
    "product_estimate": (product_ratio, _check_product),
}


# -- harness -------------------------------------------------------------------

def _job(args):
    spec, axis, seed = args
    kernel, _ = PROBES[spec.probe]
    return float(kernel(spec, spec.setting(axis), seed))


def run_probe(spec: ProbeSpec) -> ProbeReport:
    """Evaluate the ensemble at the base setting and at each requested doubling."""
    seeds = [spec.seed + i for i in range(spec.ensemble)]
    jobs = [(spec, axis, s) for axis in (None,) + spec.doublings for s in seeds]
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as ex:
            values = list(ex.map(_job, jobs, chunksize=4))
    else:
        values = [_job(j) for j in jobs]
    samples, max_ratio = [], {}
    for (sp, axis, seed), v in zip(jobs, values):
        label = axis or "base"
        st = spec.setting(axis)
        samples.append({"seed": seed, "resolution": label, "N": st.grid.points, "T": st.tgrid.t_end,
                        "band": st.band, "ratio": v})
        max_ratio[label] = max(max_ratio.get(label, -math.inf), v if math.isfinite(v) else math.inf)
    base = max_ratio["base"]
    drift = {a: (max_ratio[a] / base - 1 if base > 0 else math.inf) for a in spec.doublings}
    notes = []
    if any(v < 0 for v in values):
        notes.append("negative ratio encountered")
    return ProbeReport(spec.probe, spec.to_dict(), samples, max_ratio, drift,
                       verdict_of(max_ratio, drift, spec.drift_threshold), spec.drift_threshold, notes)


def probe(name: str, **kw) -> ProbeReport:
    return run_probe(ProbeSpec(probe=name, **kw))


def probe_strichartz(p: float, **kw) -> ProbeReport:
    params = dict(kw.pop("params", {}), p=p)
    return probe("strichartz", params=params, **kw)


def probe_local_smoothing_free(**kw) -> ProbeReport:
    return probe("local_smoothing_free", **kw)


def probe_inhomogeneous_smoothing(**kw) -> ProbeReport:
    return probe("inhomogeneous_smoothing", **kw)


def probe_maximal_global(p: float, s: float, **kw) -> ProbeReport:
    return probe("maximal_global", params=dict(kw.pop("params", {}), p=p, s=s), **kw)


def probe_maximal_mixed(p: float, q: float, s: float, **kw) -> ProbeReport:
    return probe("maximal_mixed", params=dict(kw.pop("params", {}), p=p, q=q, s=s), **kw)


def probe_maximal_uniform(p: float, s: float, **kw) -> ProbeReport:
    return probe("maximal_uniform", params=dict(kw.pop("params", {}), p=p, s=s), **kw)


def probe_product_estimate(s: float, K: int, **kw) -> ProbeReport:
    return probe("product_estimate", params=dict(kw.pop("params", {}), s=s, K=K), **kw)


# -- time-local versus time-global maximal estimates ---------------------------------

@dataclass
class MaximalContrast:
    t_ends: list
    local: list
    glob: list
    s_local: float
    p: float

    @property
    def local_growth(self) -> float:
        return self.local[-1] / self.local[0]

    @property
    def global_growth(self) -> float:
        return self.glob[-1] / self.glob[0]

    def to_dict(self) -> dict:
        return {"t_ends": self.t_ends, "local_l2": self.local, "global_lp": self.glob,
                "s_local": self.s_local, "p": self.p,
                "local_growth": self.local_growth, "global_growth": self.global_growth}


def maximal_time_local_contrast(spec: ProbeSpec, t_ends: Sequence[float] = (0.5, 1.0, 2.0, 4.0),
                                s_local: float | None = None) -> MaximalContrast:
    """Ensemble max of the l^2_alpha L^inf ratio against H^{s_local} next to the l^p_alpha one.

    The l^2 sum only holds with a T-dependent constant, so its ratio should
    climb with T while the l^p ratio settles. Steps grow with T at fixed dt.
    """
    p, s = spec.params.get("p", 4.0), spec.params.get("s", 1.1)
    s_local = spec.dim / 2 + 0.1 if s_local is None else s_local
    base = spec.base()
    local, glob = [], []
    for T in t_ends:
        steps = max(2, int(round(spec.steps * T / spec.t_end)))
        st = replace(base, tgrid=TimeGrid(T, steps))
        part = CubePartition(st.grid)
        lo = gl = 0.0
        for i in range(spec.ensemble):
            u0 = _datum(spec, st, spec.seed + i)
            cubes = cube_norms(st.prop.iter_free(u0, st.tgrid.nodes), st.tgrid, INF, INF, part)
            lo = max(lo, lp_sum(cubes, 2) / sobolev_norm(u0, s_local))
            gl = max(gl, lp_sum(cubes, p) / sobolev_norm(u0, s))
        local.append(float(lo))
        glob.append(float(gl))
    return MaximalContrast(list(t_ends), local, glob, s_local, p)


# -- 1D dyadic sweeps ------------------------------------------------------------

DYADIC_ESTIMATES = {
    # id: (claimed exponent of 2^j as a function of p, uses forcing)
    "cor-1": (lambda p: 0.0, False),
    "cor-4": (lambda p: 0.5 - 1.0 / p, False),
    "cor-7": (lambda p: -0.5, False),
    "cor-3": (lambda p: 0.5, True),
    "cor-9": (lambda p: 0.0, True),
}


@dataclass
class DyadicSweepReport:
    estimate: str
    js: list
    ratios: list
    slope: float
    claimed: float
    tolerance: float = 0.15

    @property
    def passed(self) -> bool:
        return all(math.isfinite(r) and r > 0 for r in self.ratios) and abs(self.slope - self.claimed) <= self.tolerance

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "js": self.js, "ratios": self.ratios, "slope": self.slope,
                "claimed": self.claimed, "tolerance": self.tolerance, "passed": self.passed}


def _dyadic_lhs(estimate: str, v: np.ndarray, tgrid: TimeGrid, grid: FrequencyGrid, p: float) -> float:
    if estimate in ("cor-1", "cor-3"):
        return max(space_time_norm(v, tgrid, INF, 2, grid), space_time_norm(v, tgrid, 6, 6, grid))
    if estimate == "cor-4":
        return space_time_norm_xt(v, tgrid, p, INF, grid)
    return space_time_norm_xt(v, tgrid, INF, 2, grid)


def probe_1d_dyadic_linear(j: int, estimate: str, grid: FrequencyGrid | None = None, p: float = 4.0,
                           width: float = 2.0, t0: float = 8.0, steps: int = 512,
                           start: float = -8.0, single_mode: bool = False) -> float:
    """2^{-js} times LHS/RHS for one block j.

    The datum is a packet at frequency 1.5 * 2^j of width ``width`` 2^-j,
    followed for time ``t0`` 4^-j; forcing estimates use f = chi(t) S(t) g
    over the first quarter of that window. ``single_mode`` uses one lattice
    mode in the block instead.
    """
    if estimate not in DYADIC_ESTIMATES:
        raise ContractError(f"unknown dyadic estimate {estimate!r}")
    if estimate == "cor-4" and not 4 <= p < INF:
        raise ContractError("cor-4 needs 4 <= p < inf")
    grid = grid or FrequencyGrid(1, 2048, 32.0)
    if grid.dim != 1:
        raise ContractError("dyadic sweeps are one-dimensional")
    bank = DecompositionBank(grid, HOMOGENEOUS)
    if j not in bank:
        raise ContractError(f"block {j} outside the lattice range")
    xi0 = 1.5 * 2.0 ** j
    x = grid.x[0]
    if single_mode:
        m = int(round(xi0 / grid.dxi))
        g = np.exp(1j * m * grid.dxi * x)
    else:
        sigma = width * 2.0 ** -j
        g = np.exp(1j * xi0 * x - (x - start * 2.0 ** -j) ** 2 / (2 * sigma ** 2))
    ghat = bank.multiplier(j) * fft_values(grid, g)
    if np.abs(ghat).max() == 0:
        raise ContractError("datum has no content in the block")
    tgrid = TimeGrid(t0 * 4.0 ** -j, steps)
    prop = Propagator(grid)
    gj = SpectralField(grid, ghat, FREQUENCY)
    claimed, forced = DYADIC_ESTIMATES[estimate]
    if forced:
        st = Setting(grid, tgrid, xi0, 1.0, (1,))
        fvals = resonant_forcing(gj.physical(), st, tgrid.t_end / 8, tgrid.t_end / 4)
        v = duhamel_trace(derivative_values(grid, fvals, 0), prop, tgrid)
        v = ifft_values(grid, bank.multiplier(j) * fft_values(grid, v))
        rhs = space_time_norm_xt(fvals, tgrid, 1, 2, grid)
    else:
        v = prop.free_trace(gj, tgrid.nodes)
        rhs = gj.l2()
    return _dyadic_lhs(estimate, v, tgrid, grid, p) / rhs


def dyadic_sweep(estimate: str, js: Sequence[int] = (1, 2, 3, 4), p: float = 4.0,
                 tolerance: float = 0.15, **kw) -> DyadicSweepReport:
    """Fit log2(ratio_j) against j and compare with the claimed exponent."""
    ratios = [probe_1d_dyadic_linear(j, estimate, p=p, **kw) for j in js]
    slope = fit_loglog_slope([2.0 ** j for j in js], ratios) if len(js) > 1 else math.nan
    claimed, _ = DYADIC_ESTIMATES[estimate]
    return DyadicSweepReport(estimate, list(js), ratios, slope, claimed(p), tolerance)


# -- reference configurations ------------------------------------------------------

_BOX2 = dict(dim=2, points=128, half_length=16.0, t_end=0.5)

DEFAULT_SPECS = {
    "strichartz_1d": dict(probe="strichartz", dim=1, points=256, half_length=32.0, t_end=1.0, steps=128,
                          band=2.0, width=1.0, params={"p": 6.0}),
    "local_smoothing_2d": dict(probe="local_smoothing_free", steps=64, band=2.0, width=0.25, **_BOX2),
    "inhomogeneous_2d": dict(probe="inhomogeneous_smoothing", steps=64, band=2.0, width=1.0,
                             scale_width=False, params={"duration": 0.1, "window_last": True}, **_BOX2),
    "inhomogeneous_2d_hyperbolic": dict(probe="inhomogeneous_smoothing", steps=64, band=2.0, width=1.0,
                                        scale_width=False, signature=(1, -1),
                                        params={"duration": 0.1, "window_last": True}, **_BOX2),
    "maximal_global_2d": dict(probe="maximal_global", steps=32, band=2.0, width=1.0, scale_width=False,
                              decay=3.5, params={"p": 4.0, "s": 1.1}, **_BOX2),
    "maximal_mixed_2d": dict(probe="maximal_mixed", steps=32, band=2.0, width=1.0, scale_width=False,
                             decay=3.5, params={"p": 4.0, "q": 4.0, "s": 0.7}, **_BOX2),
    "maximal_uniform_2d": dict(probe="maximal_uniform", steps=32, band=2.0, width=1.0, scale_width=False,
                               decay=3.5, params={"p": 4.0, "s": 1.1}, **_BOX2),
    "product_2d": dict(probe="product_estimate", dim=2, points=128, half_length=8.0, t_end=0.5, steps=16,
                       band=1.0, width=0.5, params={"K": 3, "s": 0.5}),
}


def default_spec(name: str, **overrides) -> ProbeSpec:
    if name not in DEFAULT_SPECS:
        raise ContractError(f"no reference configuration {name!r}")
    data = dict(DEFAULT_SPECS[name])
    data.update(overrides)
    return ProbeSpec(**data)
