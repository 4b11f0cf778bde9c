"""1D dyadic block sweeps: fitted exponents of 2^j against the claimed ones.

    python3 scripts/dyadic_sweeps.py --out results/dyadic
"""
import argparse
import json
from pathlib import Path

from dnls.prober import DYADIC_ESTIMATES, dyadic_sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/dyadic")
    ap.add_argument("--js", type=int, nargs="*", default=[1, 2, 3, 4])
    ap.add_argument("--p", type=float, default=4.0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = {}
    for name in DYADIC_ESTIMATES:
        rep = dyadic_sweep(name, js=args.js, p=args.p)
        reports[name] = rep.to_dict()
        print(f"{name}: slope {rep.slope:+.4f}, claimed {rep.claimed:+.4f}, {'ok' if rep.passed else 'off'}")
    (out / "sweeps.json").write_text(json.dumps(reports, indent=1))


if __name__ == "__main__":
    main()
