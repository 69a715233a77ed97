#!/usr/bin/env python3
"""Emit the collapse boundary map for a population as plot-ready CSV.

One row per depth: K, lambda, exact_ceiling_bits, poisson_ceiling_bits, zone.

    python3 scripts/boundary_map.py --n 11314 --rq 565 --max-k 400 > map.csv
"""

import argparse
import csv
import sys

from bor_eval.advisor import recommend_k
from bor_eval.simulate import boundary_map


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, required=True, help="population size")
    ap.add_argument("--rq", type=float, required=True,
                    help="mean relevant items per query")
    ap.add_argument("--max-k", type=int, default=1000)
    ap.add_argument("--points", type=int, default=60,
                    help="number of depths, log-spaced up to --max-k")
    args = ap.parse_args(argv)

    ks: list[int] = []
    step = args.max_k ** (1.0 / max(args.points - 1, 1))
    value = 1.0
    while len(ks) < args.points and round(value) <= args.max_k:
        k = max(round(value), ks[-1] + 1 if ks else 1)
        if k > min(args.max_k, args.n):
            break
        ks.append(k)
        value *= step

    writer = csv.writer(sys.stdout)
    writer.writerow(["k", "lambda", "exact_ceiling_bits", "poisson_ceiling_bits", "zone"])
    for d in boundary_map(args.n, args.rq, ks):
        writer.writerow([d.k, repr(d.lam), repr(d.exact_ceiling_bits),
                         repr(d.poisson_ceiling_bits), d.zone])

    rec = recommend_k(args.n, args.rq)
    if rec.saturated:
        print("# even K=1 is saturated for this population", file=sys.stderr)
    else:
        print(f"# largest depth with >= 0.1 bits of headroom: K={rec.k}",
              file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
