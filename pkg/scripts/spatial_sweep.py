#!/usr/bin/env python3
"""Spatial refinement on the manufactured solution at a small fixed tau."""

import argparse

from savif.experiments import SCHEMES, run_spatial_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scheme", choices=SCHEMES, default="savif")
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--tau", type=float, default=1e-4)
    ap.add_argument("--T", type=float, default=0.05)
    ap.add_argument("--N", type=int, nargs="+", default=[16, 24, 32, 48, 64, 96])
    args = ap.parse_args()

    res = run_spatial_sweep(args.scheme, args.N, args.tau, args.T, beta=args.beta)
    factors = [float("nan")] + res.reduction_factors()
    print(f"{'N':>5} {'H1 error':>12} {'factor':>8} {'seconds':>8}")
    for r, f in zip(res.rows, factors):
        print(f"{r['param']:5d} {r['h1_err']:12.3e} {f:8.2f} {r['seconds']:8.2f}")


if __name__ == "__main__":
    main()
