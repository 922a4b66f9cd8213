"""F_max / F_min of the four ring strategies over a p_l grid.

Writes one CSV per scenario to results/ and prints the ordering checks.
"""
import argparse
import time
from pathlib import Path

from graphpurify import analysis
from graphpurify.cli import COMPARE_COLUMNS, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p_l", type=float, nargs="+", default=[0.97, 0.98, 0.99, 0.995])
    ap.add_argument("--scenario", choices=analysis.SCENARIOS, nargs="+", default=list(analysis.SCENARIOS))
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--skip-idle", action="store_true")
    args = ap.parse_args()
    opts = analysis.StrategyOptions(skip_idle=args.skip_idle)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for scenario in args.scenario:
        t0 = time.perf_counter()
        rows = []
        for p_l in args.p_l:
            outs = analysis.compare_strategies(scenario, p_l, opts=opts)
            rows.extend(o.row() for o in outs)
            print(f"{scenario:13s} p_l={p_l:<6} F_max ordered: {analysis.fmax_ordered(outs)}  "
                  f"F_min inverted: {analysis.fmin_inverted(outs)}")
            for o in outs:
                fmin = "undefined" if o.F_min is None else f"{o.F_min:.5f}"
                print(f"    {o.strategy:10s} F_max={o.F_max:.5f}  F_min={fmin}")
        path = outdir / f"compare_{scenario}.csv"
        with open(path, "w", newline="") as fh:
            write_csv(rows, COMPARE_COLUMNS, fh)
        print(f"wrote {path} ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
