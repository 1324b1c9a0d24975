"""Rerun the five-row completion experiment and print analytical vs simulated Pr[F_min].

    python scripts/reproduce_table1.py --trials 5000000 --seed 42
"""
import argparse

from noma_temporal.montecarlo import TABLE1_REPORTED_ERRORS, reproduce_table1


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    rows = reproduce_table1(args.trials, args.seed, threads=args.threads)
    print(f"| case | m | n | z | F_min | analytical | empirical | 99.9% CI | err % | published err % |")
    print("|---|---|---|---|---|---|---|---|---|---|")
    for r, published in zip(rows, TABLE1_REPORTED_ERRORS):
        rep = r.report
        print(
            f"| {r.case.value} | {r.m} | {r.n} | {float(r.z):g} | {rep.frames} | {float(r.analytical):.6g} "
            f"| {r.empirical:.6g} | [{rep.ci_low:.4g}, {rep.ci_high:.4g}] | {r.abs_pct_error:.4f} | {published} |"
        )


if __name__ == "__main__":
    main()
