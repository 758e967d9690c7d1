#!/usr/bin/env python3
"""Eigenvalue convergence plus resolvent/heat/projection comparisons.

Wraps `que converge` and `que compare` for one pair of levels and
prints the headline numbers the artifacts contain.
"""
import argparse
import json
import os
import sys

from quecert.cli import EXIT_OK, RunConfig, cmd_certify, cmd_compare, cmd_converge


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=("interval", "gasket"),
                    default="interval")
    ap.add_argument("--level", type=int, default=3)
    ap.add_argument("--fine", type=int, default=8)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--out", default="out/spectral")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    cfg = RunConfig(command="converge", model=args.model, level=args.level,
                    k=args.k, out=args.out, seed=args.seed)
    rc = cmd_converge(cfg)
    print(f"converge {args.model} k={args.k}: exit {rc}")
    if rc != EXIT_OK:
        return rc

    cfg = RunConfig(command="certify", model=args.model, level=args.level,
                    fine=args.fine, out=args.out, seed=args.seed)
    rc = cmd_certify(cfg)
    print(f"certify {args.model} ({args.level}, {args.fine}): exit {rc}")
    if rc != EXIT_OK:
        return rc

    cfg = RunConfig(command="compare", model=args.model, level=args.level,
                    fine=args.fine, out=args.out, seed=args.seed)
    rc = cmd_compare(cfg)
    print(f"compare {args.model} ({args.level}, {args.fine}): exit {rc}")

    cert_path = os.path.join(
        args.out, f"cert_{args.model}_{args.level}_{args.fine}.json")
    if os.path.exists(cert_path):
        with open(cert_path) as fh:
            doc = json.load(fh)
        print(f"delta_total {doc['delta_total']:.6f}  "
              f"bound {doc['paper_bound']:.6f}")
    return rc


if __name__ == "__main__":
    sys.exit(main())
