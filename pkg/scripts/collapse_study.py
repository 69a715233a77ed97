#!/usr/bin/env python3
"""Depth sweep on a synthetic corpus: watch BoR collapse while raw success soars.

Runs a chosen synthetic retriever (oracle / noisy / random) over a grid of
depths and prints, per depth, the observed success rate, the BoR, and both
ceilings.  The oracle run makes the point sharply: success is 100% at every
depth, yet the bits fall to nothing as the random baseline saturates.

    python3 scripts/collapse_study.py --n 40000 --queries 500 --rq 4 \
        --retriever oracle --depths 5 10 20 50 100 200 500 1000 2000
"""

import argparse
import csv
import sys

from bor_eval.evaluator import SuccessRule
from bor_eval.metrics import depth_delta
from bor_eval.simulate import SyntheticSpec, simulate_sweep


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=40_000, help="corpus size")
    ap.add_argument("--queries", type=int, default=500)
    ap.add_argument("--rq", type=int, default=4, help="relevant docs per query")
    ap.add_argument("--retriever", choices=["oracle", "noisy", "random"],
                    default="oracle")
    ap.add_argument("--hit-prob", type=float, default=0.05,
                    help="per-slot hit probability for the noisy retriever")
    ap.add_argument("--depths", type=int, nargs="+",
                    default=[5, 10, 20, 50, 100, 200, 500, 1000, 2000])
    ap.add_argument("--m", type=int, default=1, help="hits required for success")
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--csv", action="store_true", help="emit CSV instead of a table")
    args = ap.parse_args(argv)

    spec = SyntheticSpec(args.n, args.queries, seed=args.seed, constant_r=args.rq,
                         retriever=args.retriever, hit_prob=args.hit_prob)
    rule = SuccessRule("coverage", args.m)
    reports = simulate_sweep(spec, sorted(args.depths), rule)

    if args.csv:
        writer = csv.writer(sys.stdout)
        writer.writerow(["k", "p_obs", "mean_baseline", "bor_bits",
                         "ceiling_bits", "bor_opt"])
        for r in reports:
            writer.writerow([r.k, repr(r.p_obs), repr(r.mean_baseline.value),
                             repr(r.bor.bits), repr(r.ceilings.bor_max_log_of_mean),
                             repr(r.ceilings.bor_opt)])
        return 0

    print(f"{args.retriever} retriever, n={args.n}, {args.queries} queries, "
          f"rq={args.rq}, m={args.m}")
    print(f"{'K':>6}  {'p_obs':>7}  {'baseline':>10}  {'BoR':>8}  "
          f"{'ceiling':>8}  {'bor_opt':>8}")
    prev = None
    for r in reports:
        bor_text = f"{r.bor.bits:8.3f}" if r.bor.defined else "   undef"
        print(f"{r.k:>6}  {r.p_obs:>7.4f}  {r.mean_baseline.value:>10.3e}  "
              f"{bor_text}  {r.ceilings.bor_max_log_of_mean:>8.3f}  "
              f"{r.ceilings.bor_opt:>8.3f}")
        if prev is not None and prev.bor.defined and r.bor.defined:
            d = depth_delta(prev.p_obs, r.p_obs, prev.mean_baseline,
                            r.mean_baseline, prev.k, r.k, m=args.m)
            print(f"{'':>6}  depth {prev.k}->{r.k}: {d.total:+.3f} bits "
                  f"(gain {d.gain_term:+.3f}, baseline cost {d.baseline_term:+.3f}, "
                  f"plateau prediction {d.predicted_plateau:+.3f})")
        prev = r
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
