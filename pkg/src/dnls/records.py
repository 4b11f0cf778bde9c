"""Artifacts on disk: schema validation, JSON/CSV emission, manifests, norm tables."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .grid import ContractError

SCHEMAS = ("config", "probe_spec", "probe_report", "run_record", "manifest", "error", "selfcheck")


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(name)
    return json.loads(resources.files("dnls").joinpath("schemas", f"{name}.json").read_text())


def validate(data, name: str) -> None:
    try:
        jsonschema.validate(data, schema(name))
    except jsonschema.ValidationError as exc:
        raise ContractError(f"{name}: {exc.message}") from exc


def clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(data) -> str:
    return json.dumps(clean(data), sort_keys=True, indent=1, allow_nan=False)


class ArtifactWriter:
    """Writes files under one output directory and keeps the manifest."""

    def __init__(self, root, config_hash: str):
        self.root = Path(root).resolve()
        self.config_hash = config_hash
        self.files: list[str] = []
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, rel: str) -> Path:
        p = (self.root / rel).resolve()
        if self.root not in p.parents and p != self.root:
            raise ContractError(f"refusing to write outside {self.root}: {rel}")
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def _track(self, rel: str) -> Path:
        p = self.path(rel)
        if rel not in self.files:
            self.files.append(rel)
        return p

    def json(self, rel: str, data: dict, schema_name: str | None = None) -> Path:
        data = clean(dict(data, config_hash=self.config_hash))
        if schema_name:
            validate(data, schema_name)
        p = self._track(rel)
        p.write_text(dumps(data))
        return p

    def text(self, rel: str, text: str) -> Path:
        p = self._track(rel)
        p.write_text(text)
        return p

    def binary(self, rel: str, writer) -> Path:
        """``writer(path)`` produces the file."""
        p = self._track(rel)
        writer(p)
        return p

    def manifest(self) -> dict:
        entries = []
        for rel in sorted(self.files):
            blob = self.path(rel).read_bytes()
            entries.append({"path": rel, "sha256": hashlib.sha256(blob).hexdigest(), "bytes": len(blob)})
        data = {"config_hash": self.config_hash, "files": entries}
        validate(data, "manifest")
        self.path("manifest.json").write_text(dumps(data))
        return data


# -- norm tables ---------------------------------------------------------------

NORM_TABLE_COLUMNS = ["object", "norm_id", "params", "value", "tail_fraction"]
FIELD_NORM_IDS = ("lebesgue", "sobolev", "besov", "modulation", "homogeneous_besov_1d")
TRACE_NORM_IDS = ("space_time", "cube_mixed", "l1s_delta", "l1s_box", "x_norm_1d")


def norm_table(objects: dict, specs: list, tgrid=None, grid=None) -> list[dict]:
    """One row per (object, norm spec). Objects are SpectralFields or space-time trace arrays.

    Exponents may be given as the string "inf".
    """
    from . import norms as nm
    from .decomp import DecompositionBank, DYADIC, UNIFORM
    from .grid import SpectralField

    rows = []
    for name, obj in objects.items():
        for spec in specs:
            spec = {k: (math.inf if v == "inf" else v) for k, v in spec.items()}
            nid = spec.pop("id", None)
            tail = 0.0
            if isinstance(obj, SpectralField):
                if nid == "lebesgue":
                    value = nm.lebesgue_norm(obj, spec.get("p", 2.0))
                elif nid == "sobolev":
                    value = nm.sobolev_norm(obj, spec.get("s", 0.0), spec.get("homogeneous", False))
                elif nid in ("besov", "modulation"):
                    rep = (nm.besov_report if nid == "besov" else nm.modulation_report)(
                        obj, spec.get("s", 0.0), spec.get("p", 2.0), spec.get("q", 2.0))
                    value, tail = rep.value, rep.tail_fraction
                elif nid == "homogeneous_besov_1d":
                    value = nm.homogeneous_besov_norm_1d(obj, spec.get("s", 0.0))
                else:
                    raise ContractError(f"unknown field norm id {nid!r}")
            else:
                if tgrid is None or grid is None:
                    raise ContractError("trace norms need a grid and a time grid")
                if nid == "space_time":
                    value = nm.space_time_norm(obj, tgrid, spec.get("p_time", 2.0), spec.get("r_space", 2.0), grid)
                elif nid == "cube_mixed":
                    value = nm.cube_mixed_norm(obj, tgrid, spec.get("q", 2.0), spec.get("p_time", 2.0),
                                               spec.get("r_space", 2.0), grid=grid)
                elif nid in ("l1s_delta", "l1s_box"):
                    bank = DecompositionBank(grid, DYADIC if nid == "l1s_delta" else UNIFORM)
                    rep = nm.composite_block_cube_report(obj, tgrid, spec.get("s", 0.0), bank, spec.get("q", 1.0),
                                                         spec.get("p_time", 2.0), spec.get("r_space", 2.0))
                    value, tail = rep.value, rep.tail_fraction
                elif nid == "x_norm_1d":
                    value = nm.x_norm_1d(obj, tgrid, grid, spec.get("m", 4), spec.get("M", 4))
                else:
                    raise ContractError(f"unknown trace norm id {nid!r}")
            rows.append({"object": name, "norm_id": nid, "params": json.dumps(clean(spec), sort_keys=True),
                         "value": float(value), "tail_fraction": float(tail)})
    return rows


def rows_to_csv(rows: list[dict], columns=NORM_TABLE_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
