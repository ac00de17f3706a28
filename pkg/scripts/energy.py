#!/usr/bin/env python3
"""Relative modified-energy error along an Example 2 trajectory (optionally written to CSV)."""

import argparse
import csv

from savif.experiments import SCHEMES, example2_grid, run_energy_experiment
from savif.sav_core import ProblemParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scheme", choices=SCHEMES, nargs="+", default=list(SCHEMES))
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--tau", type=float, default=0.05)
    ap.add_argument("--T", type=float, default=5.0)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--csv", help="write n,t,<scheme RE columns> here")
    args = ap.parse_args()

    params = ProblemParams(example2_grid(args.N), 1.0, args.beta, 1.0)
    series = {}
    for scheme in args.scheme:
        series[scheme] = s = run_energy_experiment(scheme, params, args.tau, args.T)
        print(f"{scheme:>8}: max RE = {s.max_RE:.3e}")
    if args.csv:
        first = next(iter(series.values()))
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "t", *(f"RE_{k}" for k in series)])
            for i, (n, t) in enumerate(zip(first.n, first.t)):
                w.writerow([n, f"{t:.17g}", *(f"{s.RE[i]:.17g}" for s in series.values())])


if __name__ == "__main__":
    main()
