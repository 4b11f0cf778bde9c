"""Run configuration: JSON in, validated dataclass out."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .grid import ContractError, FrequencyGrid, SpectralField, gaussian_packet, random_band_limited, read_snapshot
from .nonlinearity import PolynomialNonlinearity
from .propagator import Propagator, TimeGrid, check_signature
from .records import validate

KINDS = ("evolve", "picard", "probe", "scatter", "norms")


@dataclass
class RunConfig:
    kind: str
    dim: int = 1
    points: int = 256
    half_length: float = 50.26548245743669  # 16 pi
    signature: list | None = None
    t_end: float = 1.0
    steps: int = 256
    nonlinearity: str | None = None
    amplitude: float = 1.0
    datum: dict = field(default_factory=lambda: {"type": "gaussian", "width": 2.0})
    out: str | None = None
    seed: int = 0
    tol: float = 1e-8
    max_iter: int = 50
    norm: str | None = None
    strang: bool = True
    dealias: bool = False
    snapshot_every: int = 1
    sample_every: int = 8
    norms: list = field(default_factory=list)
    base_dir: str = "."

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "RunConfig":
        validate(data, "config")
        data = dict(data)
        recorded = data.pop("config_hash", None)
        cfg = cls(**data, base_dir=str(base_dir))
        if recorded is not None and recorded != cfg.config_hash():
            raise ContractError("recorded config_hash does not match the config contents")
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        with open(path) as fh:
            data = json.load(fh)
        return cls.from_dict(data, path.parent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def check(self) -> None:
        """Module preconditions, checked before any computation."""
        if self.kind not in KINDS:
            raise ContractError(f"unknown scenario kind {self.kind!r}")
        self.grid()
        self.tgrid()
        check_signature(self.signature if self.signature is not None else [1] * self.dim, self.dim)
        if self.nonlinearity is not None:
            if not self.resolve(self.nonlinearity).is_file():
                raise ContractError(f"nonlinearity file {self.nonlinearity} not found")
        if self.datum.get("type") == "snapshot" and not self.resolve(self.datum["path"]).is_file():
            raise ContractError(f"snapshot {self.datum['path']} not found")
        if self.snapshot_every < 1 or self.sample_every < 1:
            raise ContractError("snapshot_every and sample_every must be positive")

    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.dim, self.points, self.half_length)

    def tgrid(self) -> TimeGrid:
        return TimeGrid(self.t_end, self.steps)

    def propagator(self) -> Propagator:
        return Propagator(self.grid(), self.signature)

    def load_nonlinearity(self) -> PolynomialNonlinearity | None:
        if self.nonlinearity is None:
            return None
        F = PolynomialNonlinearity.load(self.resolve(self.nonlinearity))
        if F.dim != self.dim:
            raise ContractError("nonlinearity dimension does not match the grid")
        return F

    def initial_datum(self) -> SpectralField:
        grid = self.grid()
        d = self.datum
        kind = d.get("type")
        if kind == "gaussian":
            f = gaussian_packet(grid, d.get("center", 0.0), d.get("width", 2.0), d.get("carrier", 0.0))
        elif kind == "random":
            f = random_band_limited(grid, self.seed, d.get("band", 4.0), d.get("decay", 0.0))
        elif kind == "snapshot":
            f, _ = read_snapshot(self.resolve(d["path"]))
            if f.grid != grid:
                raise ContractError("snapshot grid does not match the configured grid")
        else:
            raise ContractError(f"unknown datum type {kind!r}")
        return f.physical() * self.amplitude


def output_dir(flag: str | None, cfg_out: str | None = None) -> Path:
    """DNLS_OUT beats --out, which beats the config's own ``out``."""
    env = os.environ.get("DNLS_OUT")
    return Path(env or flag or cfg_out or "dnls_out")
