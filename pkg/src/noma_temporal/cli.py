"""Command-line entry point.

Exit codes: 0 ok, 1 runtime failure, 2 usage error, 3 invalid parameters.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction

from noma_temporal import analysis, montecarlo, probability
from noma_temporal.core import ParameterError, ensemble_size, make_params
from noma_temporal.probability import MembershipClass

SCHEMA_VERSION = "1"


def frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _rational(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}")


def _params(args):
    return make_params(args.m, args.n, args.z)


def cmd_ensemble(args):
    params = _params(args)
    size = ensemble_size(params)
    return params.as_dict(), {"ensemble_size": size, "p": frac(params.p), "p_float": float(params.p)}, None


def cmd_membership(args):
    params = _params(args)
    classes = {}
    rows = []
    for cls in MembershipClass:
        pr = probability.class_probability(params, cls)
        pmf = probability.membership_count_pmf(params, args.frames, cls)
        classes[cls.value] = {
            "p": frac(pr),
            "p_float": float(pr),
            "pmf": [{"k": k, "mass": frac(w), "mass_float": float(w)} for k, w in pmf.items()],
        }
        rows += [{"class": cls.value, "k": k, "mass": frac(w), "mass_float": float(w)} for k, w in pmf.items()]
    echo = dict(params.as_dict(), frames=args.frames)
    return echo, {"classes": classes}, rows


def cmd_joint(args):
    params = _params(args)
    if not 0 <= args.sample <= params.m:
        raise ParameterError(f"--sample must be in [0, m], got {args.sample}")
    rows = []
    for r in probability.joint_table(params, args.sample):
        rows.append(
            {
                "k": r["k"],
                "unlabeled": frac(r["unlabeled"]),
                "unlabeled_float": float(r["unlabeled"]),
                "labeled": frac(r["labeled"]),
                "labeled_float": float(r["labeled"]),
                "patterns": r["patterns"],
            }
        )
    return dict(params.as_dict(), sample=args.sample), {"rows": rows}, rows


def cmd_fmin(args):
    params = _params(args)
    res = analysis.pr_fmin(params, trials=args.trials, seed=args.seed, threads=args.threads)
    echo = dict(params.as_dict(), trials=args.trials)
    return echo, res.as_dict(), None


def cmd_simulate(args):
    params = _params(args)
    echo = dict(params.as_dict(), trials=args.trials)
    if args.max_frames is None:
        rep = montecarlo.estimate_pr_fmin(params, args.trials, args.seed, threads=args.threads, level=args.level)
        out = rep.as_dict(timing=False)
        out["analytical"] = analysis.pr_fmin(params).as_dict()
        return echo, out, None
    echo["max_frames"] = args.max_frames
    hist = montecarlo.completion_time_distribution(params, args.trials, args.max_frames, args.seed, threads=args.threads)
    rows = hist.as_rows()
    return echo, {"histogram": rows, "censored": hist.censored, "trials": hist.trials}, rows


def cmd_table1(args):
    if args.trials < 10**4:
        raise ParameterError("table1 needs --trials >= 10000")
    rows = montecarlo.reproduce_table1(args.trials, args.seed, threads=args.threads, level=args.level)
    dicts = [r.as_dict(timing=False) for r in rows]
    return {"trials": args.trials, "level": args.level}, {"rows": dicts}, dicts


COMMANDS = {
    "ensemble": cmd_ensemble,
    "membership": cmd_membership,
    "joint": cmd_joint,
    "fmin": cmd_fmin,
    "simulate": cmd_simulate,
    "table1": cmd_table1,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noma-temporal", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--no-timing", action="store_true", help="omit the timing field")
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads (env NOMA_THREADS)")

    net = argparse.ArgumentParser(add_help=False)
    net.add_argument("--m", type=int, required=True, help="number of network devices")
    net.add_argument("--n", type=int, required=True, help="number of resource blocks")
    net.add_argument("--z", type=_rational, required=True, help="overloading ratio, e.g. 4, 2.5 or 5/2")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ensemble", parents=[common, net])
    p = sub.add_parser("membership", parents=[common, net])
    p.add_argument("--frames", type=int, default=1)
    p = sub.add_parser("joint", parents=[common, net])
    p.add_argument("--sample", type=int, required=True, help="number of sampled devices m_s")
    p = sub.add_parser("fmin", parents=[common, net])
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo fallback trials (Case 3.3)")
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("simulate", parents=[common, net])
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-frames", type=int, default=None)
    p.add_argument("--level", type=float, default=0.99)
    p = sub.add_parser("table1", parents=[common])
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--level", type=float, default=0.999)
    return parser


def _write_csv(rows, stream):
    if not rows:
        return
    writer = csv.DictWriter(stream, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    t0 = time.perf_counter()
    try:
        echo, results, rows = COMMANDS[args.command](args)
    except ParameterError as e:
        print(f"error: {e}", file=stderr)
        return 3
    except Exception as e:  # noqa: BLE001
        print(f"error: {type(e).__name__}: {e}", file=stderr)
        return 1
    elapsed = time.perf_counter() - t0

    if args.format == "csv":
        if rows is None:
            print(f"error: {args.command} has no tabular output; use --format json", file=stderr)
            return 2
        _write_csv(rows, stdout)
        return 0
    record = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "params": echo,
        "seed": getattr(args, "seed", None),
        "results": results,
    }
    if not args.no_timing:
        record["timing"] = {"elapsed_s": elapsed}
    json.dump(record, stdout, indent=2)
    stdout.write("\n")
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
