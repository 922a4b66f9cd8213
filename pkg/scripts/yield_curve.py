"""Breeding yield of white-noise 5-ring states; writes results/yield_curve.csv."""
import argparse
from pathlib import Path

import numpy as np

from graphpurify.breeding import ring_yield_curve, yield_crossing
from graphpurify.cli import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/yield_curve.csv")
    ap.add_argument("--step", type=float, default=0.005)
    args = ap.parse_args()

    grid = np.round(np.arange(0.8, 1.0 + args.step / 2, args.step), 10)
    rows = ring_yield_curve(grid)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        write_csv(rows, list(rows[0]), fh)
    print(f"wrote {len(rows)} rows to {out}")
    print(f"Y = 2/3 at f = {yield_crossing():.6f}")


if __name__ == "__main__":
    main()
