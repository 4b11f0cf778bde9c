"""Compare the time-local l^2 maximal ratio with the global l^p one as T grows.

    python3 scripts/time_local_contrast.py --out results/contrast
"""
import argparse
import json
from pathlib import Path

from dnls.prober import ProbeSpec, maximal_time_local_contrast


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/contrast")
    ap.add_argument("--t-ends", type=float, nargs="*", default=[0.5, 1.0, 2.0, 4.0, 8.0])
    ap.add_argument("--ensemble", type=int, default=16)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = ProbeSpec(probe="maximal_global", dim=1, points=256, half_length=32.0, t_end=0.5, steps=16,
                     band=2.0, width=1.0, scale_width=False, decay=3.5, ensemble=args.ensemble,
                     params={"p": 6.0, "s": 1.1})
    res = maximal_time_local_contrast(spec, args.t_ends)
    for T, lo, gl in zip(res.t_ends, res.local, res.glob):
        print(f"T={T:5.2f}  local l2 {lo:.4f}  global lp {gl:.4f}")
    print(f"growth: local {res.local_growth:.3f}, global {res.global_growth:.3f}")
    (out / "contrast.json").write_text(json.dumps(res.to_dict(), indent=1))


if __name__ == "__main__":
    main()
