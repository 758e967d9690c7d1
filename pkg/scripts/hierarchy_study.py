#!/usr/bin/env python3
"""Certify the standard ladders on both models and aggregate a report.

Runs the same code paths as `que certify` / `que report`, so the
artifacts land in the usual layout and the verdict comes from at least
three certificates per model.
"""
import argparse
import sys
import time

from quecert.cli import EXIT_OK, RunConfig, cmd_certify, cmd_report

INTERVAL_LADDER = [(1, 6), (2, 7), (3, 8), (4, 8), (5, 8), (6, 8)]
GASKET_LADDER = [(1, 4), (2, 5), (3, 6), (4, 7)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/hierarchy")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument(
        "--quick", action="store_true",
        help="skip the two most expensive gasket pairs",
    )
    args = ap.parse_args(argv)

    ladders = {
        "interval": INTERVAL_LADDER,
        "gasket": GASKET_LADDER[:2] if args.quick else GASKET_LADDER,
    }
    for model, pairs in ladders.items():
        for m, M in pairs:
            t0 = time.perf_counter()
            rc = cmd_certify(RunConfig(
                command="certify", model=model, level=m, fine=M,
                out=args.out, seed=args.seed,
            ))
            dt = time.perf_counter() - t0
            print(f"certify {model} ({m}, {M}): exit {rc}  [{dt:.1f}s]")
            if rc != EXIT_OK:
                return rc
    return cmd_report(RunConfig(command="report", out=args.out,
                                seed=args.seed))


if __name__ == "__main__":
    sys.exit(main())
