"""Exact vs simulated P[complete within F frames] as CSV, for plotting.

The exact column comes from the coverage DP, the empirical one from the
first-completion histogram.

    python scripts/completion_curves.py --m 8 --n 1 --z 3 --max-frames 14 > curve.csv
"""
import argparse
import csv
import sys
from fractions import Fraction

from noma_temporal.analysis import completion_probability
from noma_temporal.core import make_params
from noma_temporal.montecarlo import completion_time_distribution


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, required=True)
    ap.add_argument("--n", type=int, required=True)
    ap.add_argument("--z", type=Fraction, required=True)
    ap.add_argument("--max-frames", type=int, default=12)
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = make_params(args.m, args.n, args.z)
    hist = completion_time_distribution(params, args.trials, args.max_frames, args.seed)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["frames", "exact", "empirical"])
    done = 0
    for t, c in enumerate(hist.counts, start=1):
        done += c
        out.writerow([t, float(completion_probability(params, t)), done / args.trials])


if __name__ == "__main__":
    main()
