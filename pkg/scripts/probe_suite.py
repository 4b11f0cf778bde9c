"""Run the reference probe configurations and tabulate max ratios and drifts.

    python3 scripts/probe_suite.py --ensemble 32 --out results/probes
"""
import argparse
import csv
import time
from pathlib import Path

from dnls.prober import DEFAULT_SPECS, default_spec, run_probe


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/probes")
    ap.add_argument("--ensemble", type=int, default=32)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="*", default=None, help="subset of reference names")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name in args.only or list(DEFAULT_SPECS):
        t0 = time.perf_counter()
        rep = run_probe(default_spec(name, ensemble=args.ensemble, workers=args.workers))
        (out / f"{name}.json").write_text(rep.to_json())
        rep.write_csv(out / f"{name}_ratios.csv")
        row = {"name": name, "verdict": rep.verdict, "base_max": rep.max_ratio["base"],
               **{f"drift_{a}": d for a, d in rep.drift.items()}, "seconds": time.perf_counter() - t0}
        rows.append(row)
        print(", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    fields = sorted({k for r in rows for k in r}, key=lambda k: (k != "name", k))
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
