"""Command line entry point: ``dnls {evolve,picard,probe,scatter,norms,selfcheck}``."""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, output_dir
from .grid import ContractError, SpectralField, write_snapshot
from .prober import ProbeSpec, run_probe
from .records import (FIELD_NORM_IDS, TRACE_NORM_IDS, ArtifactWriter, clean, norm_table,
                      rows_to_csv, validate)
from .selfcheck import run_selfcheck
from .solver import SolverError, extract_scattering_state, picard_solve, sobolev_trace, split_step_evolve

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("evolve", "picard", "probe", "scatter", "norms", "selfcheck")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dnls", description="Spectral experiments for derivative NLS.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "probe":
            p.add_argument("--spec", required=True, help="probe spec JSON")
        elif name != "selfcheck":
            p.add_argument("--config", required=True, help="run config JSON")
        p.add_argument("--out", help="output directory (DNLS_OUT takes precedence)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, help="override the seed in the config or spec")
    return ap


# -- scenario runners ------------------------------------------------------------

def _snapshots(w: ArtifactWriter, trace: np.ndarray, tgrid, cfg: RunConfig) -> list:
    grid, sig = cfg.grid(), cfg.propagator().signature
    names, idx = [], list(range(0, tgrid.steps + 1, cfg.snapshot_every))
    for k in idx:
        rel = f"snapshots/u_{k:06d}.snap"
        w.binary(rel, lambda p, k=k: write_snapshot(p, SpectralField(grid, trace[k]), sig))
        names.append(rel)
    w.json("snapshots/times.json", {"index": idx, "times": tgrid.nodes[idx], "files": names})
    return names


def _norm_rows(cfg: RunConfig, u0: SpectralField, trace: np.ndarray | None, tgrid) -> list:
    field_specs = [s for s in cfg.norms if s["id"] in FIELD_NORM_IDS]
    trace_specs = [s for s in cfg.norms if s["id"] in TRACE_NORM_IDS]
    unknown = [s["id"] for s in cfg.norms if s["id"] not in FIELD_NORM_IDS + TRACE_NORM_IDS]
    if unknown:
        raise ContractError(f"unknown norm ids {unknown}")
    rows = norm_table({"u0": u0}, field_specs)
    if trace is not None and trace_specs:
        rows += norm_table({"trace": trace}, trace_specs, tgrid, cfg.grid())
    return rows


def _growth(trace, grid) -> dict:
    h1 = sobolev_trace(trace, grid, 1.0)
    return {"s": 1.0, "sup_ratio": float(h1.max() / h1[0]) if h1[0] > 0 else 1.0}


def run_evolve(cfg: RunConfig, w: ArtifactWriter) -> dict:
    prop, tg, u0 = cfg.propagator(), cfg.tgrid(), cfg.initial_datum()
    F = cfg.load_nonlinearity()
    if F is None:
        trace = prop.free_trace(u0, tg.nodes)
    else:
        trace, _ = split_step_evolve(u0, F, prop, tg.dt, tg.steps, cfg.strang, cfg.dealias)
    snaps = _snapshots(w, trace, tg, cfg)
    rows = _norm_rows(cfg, u0, trace, tg)
    return {"scenario": "evolve", "status": "ok", "growth": _growth(trace, prop.grid),
            "snapshots": snaps, "norms": rows}


def run_picard(cfg: RunConfig, w: ArtifactWriter) -> dict:
    prop, tg, u0 = cfg.propagator(), cfg.tgrid(), cfg.initial_datum()
    state = picard_solve(u0, cfg.load_nonlinearity(), prop, tg, cfg.norm, cfg.tol, cfg.max_iter,
                         dealias=cfg.dealias)
    snaps = _snapshots(w, state.trace, tg, cfg)
    rec = state.record()
    return {"scenario": "picard", "status": state.status, "contraction": rec,
            "growth": _growth(state.trace, prop.grid), "snapshots": snaps,
            "norms": _norm_rows(cfg, u0, state.trace, tg)}


def run_scatter(cfg: RunConfig, w: ArtifactWriter) -> dict:
    prop, tg, u0 = cfg.propagator(), cfg.tgrid(), cfg.initial_datum()
    F = cfg.load_nonlinearity()
    trace, _ = split_step_evolve(u0, F, prop, tg.dt, tg.steps, cfg.strang, cfg.dealias)
    rec = extract_scattering_state(trace, prop, tg, cfg.sample_every, F)
    w.binary("u_plus.snap", lambda p: write_snapshot(p, rec.u_plus, prop.signature))
    return {"scenario": "scatter", "status": "ok", "scattering": rec.record(),
            "growth": _growth(trace, prop.grid), "norms": _norm_rows(cfg, u0, None, tg)}


def run_norms(cfg: RunConfig, w: ArtifactWriter) -> dict:
    prop, tg, u0 = cfg.propagator(), cfg.tgrid(), cfg.initial_datum()
    needs_trace = any(s["id"] in TRACE_NORM_IDS for s in cfg.norms)
    trace = prop.free_trace(u0, tg.nodes) if needs_trace else None
    return {"scenario": "norms", "status": "ok", "norms": _norm_rows(cfg, u0, trace, tg)}


RUNNERS = {"evolve": run_evolve, "picard": run_picard, "scatter": run_scatter, "norms": run_norms}


def run(cfg: RunConfig, out: Path) -> dict:
    """Execute one configured scenario and write its artifacts under ``out``."""
    if cfg.kind not in RUNNERS:
        raise ContractError(f"scenario kind {cfg.kind!r} is run through its own subcommand")
    w = ArtifactWriter(out, cfg.config_hash())
    validate(clean(cfg.to_dict()), "config")
    w.json("config.json", cfg.to_dict())
    record = RUNNERS[cfg.kind](cfg, w)
    w.text("norm_table.csv", rows_to_csv(record.get("norms", [])))
    w.json("run_record.json", record, "run_record")
    return w.manifest()


def run_probe_spec(spec: ProbeSpec, out: Path) -> dict:
    d = spec.to_dict()
    d.pop("workers")
    chash = hashlib.sha256(json.dumps(clean(d), sort_keys=True).encode()).hexdigest()
    w = ArtifactWriter(out, chash)
    report = run_probe(spec)
    w.json("report.json", report.to_dict(), "probe_report")
    w.binary("ratios.csv", report.write_csv)
    man = w.manifest()
    man["verdict"] = report.verdict
    return man


# -- main ------------------------------------------------------------------------

def _error(kind: str, code: int, exc: Exception, details=None) -> int:
    data = {"error": kind, "message": str(exc), "exit_code": code}
    if details:
        data["details"] = clean(details)
    validate(data, "error")
    print(json.dumps(data, sort_keys=True), file=sys.stderr)
    return code


def _load_json(path) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ContractError(f"{path}: {exc}") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selfcheck":
            res = run_selfcheck(args.seed or 0)
            validate(res, "selfcheck")
            out = output_dir(args.out)
            w = ArtifactWriter(out, "selfcheck")
            w.json("selfcheck.json", res, "selfcheck")
            w.manifest()
            print(json.dumps({"passed": res["passed"], "out": str(out)}))
            return EXIT_OK if res["passed"] else EXIT_NUMERICAL
        if args.command == "probe":
            data = _load_json(args.spec)
            validate(data, "probe_spec")
            if args.seed is not None:
                data["seed"] = args.seed
            data["workers"] = args.workers
            spec = ProbeSpec.from_dict(data)
            out = output_dir(args.out)
            man = run_probe_spec(spec, out)
            print(json.dumps({"verdict": man["verdict"], "out": str(out)}))
            return EXIT_OK
        data = _load_json(args.config)
        if data.get("kind") != args.command:
            raise ContractError(f"config kind {data.get('kind')!r} does not match command {args.command!r}")
        if args.seed is not None:
            data["seed"] = args.seed
        cfg = RunConfig.from_dict(data, Path(args.config).parent)
        out = output_dir(args.out, cfg.out)
        run(cfg, out)
        print(json.dumps({"status": "ok", "out": str(out)}))
        return EXIT_OK
    except ContractError as exc:
        return _error("validation", EXIT_VALIDATION, exc)
    except SolverError as exc:
        details = exc.state.record() if getattr(exc, "state", None) is not None else None
        return _error("numerical", EXIT_NUMERICAL, exc, details)
    except OSError as exc:
        return _error("io", EXIT_IO, exc)


if __name__ == "__main__":
    sys.exit(main())
