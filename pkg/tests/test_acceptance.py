"""Acceptance gate: one test per exit criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""
import io
import itertools
import json
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from noma_temporal.affine import AffineState, pair_reachability_oracle, step
from noma_temporal.analysis import completion_probability, enumerate_completion_probability, min_frames, pr_fmin
from noma_temporal.cli import run as cli_run
from noma_temporal.core import ensemble_array, make_params, params_for_load, sample_sequence
from noma_temporal.montecarlo import (
    TABLE1_REPORTED_ERRORS,
    binomial_ci,
    empirical_membership_freq,
    estimate_pr_fmin,
    reproduce_table1,
)
from noma_temporal.probability import (
    MembershipClass,
    binomial_pmf,
    class_probability,
    joint_labeled_prob,
    joint_unlabeled_pmf,
)

SEED = 42


_reporter = None


def verdict(name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    if _reporter is not None:
        _reporter.write_line(line)
    else:
        print(line)
    assert ok, line


@pytest.fixture(autouse=True)
def _terminal(request):
    global _reporter
    _reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    if _reporter is not None:
        _reporter.write_line("")
    yield


def test_1_table1_reproduction():
    rows = reproduce_table1(10**6, SEED, level=0.999)
    details = []
    ok = True
    for r in rows:
        inside = r.report.ci_low <= float(r.analytical) <= r.report.ci_high
        ok &= inside and r.report.early == 0
        details.append(f"{r.case.value}:{r.empirical:.4g}/{float(r.analytical):.4g}")
    verdict("C1a Table 1 at 1e6 trials, 99.9% CI contains analytical", ok, ", ".join(details))

    big = reproduce_table1(5 * 10**6, SEED + 1, level=0.999)
    errs = []
    ok = True
    for r in big:
        a = float(r.analytical)
        lo, hi = binomial_ci(round(a * r.report.trials), r.report.trials, 0.999)
        tolerance = 100 * max(hi - a, a - lo) / a
        ok &= r.abs_pct_error <= tolerance and r.report.early == 0
        errs.append(f"{r.case.value}:{r.abs_pct_error:.4f}%<=+-{tolerance:.3f}%")
    verdict(
        "C1b Table 1 at 5e6 trials, abs % error within sampling scale "
        f"(paper max {max(TABLE1_REPORTED_ERRORS)}%)",
        ok,
        ", ".join(errs),
    )


def test_2_exhaustive_case1():
    params = make_params(9, 2, 4)
    got = enumerate_completion_probability(params, 2)
    verdict("C2 exhaustive 9^4 sequences, Case 1", got == Fraction(64, 729) == pr_fmin(params).probability, str(got))


def test_3_exhaustive_case2():
    params = make_params(6, 2, 2)
    got = enumerate_completion_probability(params, 3)
    verdict("C3 exhaustive 15^6 sequences, Case 2", got == Fraction(4, 25) == pr_fmin(params).probability, str(got))


def test_4_matrix_framework_equivalence():
    rng = np.random.default_rng(SEED)
    mismatches = 0
    queue_ok = True
    n_seq = 10_000
    for i in range(n_seq):
        m = int(rng.integers(2, 9))
        zn = int(rng.integers(1, m))
        N = int(rng.integers(0, 13))
        seq = sample_sequence(params_for_load(m, zn), N, [SEED, i])
        state = AffineState.initial(m)
        for f in seq.frames:
            state = step(state, f)
            queue_ok &= bool((state.Q >= 0).all()) and not np.diag(state.Q).any()
        if not np.array_equal((state.S > 0).astype(int), pair_reachability_oracle(seq)):
            mismatches += 1
    verdict("C4 recurrence support == pair oracle", mismatches == 0 and queue_ok, f"{n_seq} sequences, {mismatches} mismatches")


def test_5_normalization_suite():
    checks = 0
    ok = True
    for m in range(2, 13):
        for zn in range(1, m):
            params = params_for_load(m, zn)
            cls = [class_probability(params, c) for c in MembershipClass]
            ok &= sum(cls) == 1
            for N in range(0, 13):
                ok &= binomial_pmf(N, params.p).total() == 1
                for p in cls:
                    ok &= binomial_pmf(N, p).total() == 1
            for m_s in range(0, min(5, m) + 1):
                ok &= sum(joint_unlabeled_pmf(params, m_s, k) for k in range(m_s + 1)) == 1
                ok &= sum(comb(m_s, k) * joint_labeled_prob(params, m_s, k) for k in range(m_s + 1)) == 1
            checks += 1
    verdict("C5 exact normalization sweep m<=12", ok, f"{checks} (m, zn) pairs")


def test_6_joint_probability_oracle():
    ok = True
    cases = 0
    for m in range(2, 9):
        for zn in range(1, m):
            params = params_for_load(m, zn)
            ens = ensemble_array(params)
            total = len(ens)
            for m_s in range(0, min(4, m) + 1):
                for sample in itertools.combinations(range(m), m_s):
                    sub = ens[:, list(sample)]
                    counts = np.bincount(sub.sum(axis=1), minlength=m_s + 1)
                    for k in range(m_s + 1):
                        ok &= joint_unlabeled_pmf(params, m_s, k) == Fraction(int(counts[k]), total)
                    for pattern in itertools.product((0, 1), repeat=m_s):
                        hits = int(np.count_nonzero((sub == np.array(pattern, bool)).all(axis=1)))
                        ok &= joint_labeled_prob(params, m_s, sum(pattern)) == Fraction(hits, total)
                    cases += 1
    verdict("C6 joint pmf == ensemble enumeration (m<=8, m_s<=4)", ok, f"{cases} labeled samples")


def test_7_case33_dual_method():
    details = []
    ok = True
    for r, (m, z) in enumerate([(8, 3), (11, 3)]):
        params = make_params(m, 1, z)
        exact = pr_fmin(params)
        rep = estimate_pr_fmin(params, 10**6, [SEED, 7, r], level=0.99)
        inside = rep.ci_low <= float(exact.probability) <= rep.ci_high
        fmin_ok = rep.frames == min_frames(params) == 2 * -(-m // z) - 1
        ok &= inside and rep.early == 0 and fmin_ok and exact.probability == completion_probability(params, rep.frames)
        details.append(
            f"m={m}: DP={float(exact.probability):.4g} MC={rep.estimate:.4g} "
            f"[{rep.ci_low:.3g},{rep.ci_high:.3g}] early={rep.early}"
        )
    verdict("C7 Case 3.3 DP inside 99% MC CI, no early completion", ok, "; ".join(details))


def test_8_membership_frequencies():
    ok = True
    details = []
    for (m, n, z), expected, trials in [
        ((10, 2, "5/2"), (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)), 1000),
        ((9, 2, 4), (Fraction(64, 81), Fraction(16, 81), Fraction(1, 81)), 1112),
    ]:
        freq = empirical_membership_freq(make_params(m, n, z), 10, trials, [SEED, m])
        n_obs = freq.observations
        ok &= n_obs >= 10**5 and sum(freq.fractions()) == 1
        zs = []
        for got, p in zip(freq.fractions(), expected):
            sigma = np.sqrt(float(p) * (1 - float(p)) / n_obs)
            zs.append(abs(float(got) - float(p)) / sigma)
        ok &= max(zs) < 4
        details.append(f"m={m}: max |z|={max(zs):.2f} over {n_obs} obs")
    verdict("C8 membership frequencies within 4 sigma", ok, "; ".join(details))


def _payload(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli_run(argv, stdout=out, stderr=err)
    assert code == 0, err.getvalue()
    rec = json.loads(out.getvalue())
    rec.pop("timing", None)
    return rec


def test_9_determinism_across_threads():
    commands = [
        ["ensemble", "--m", "6", "--n", "2", "--z", "2"],
        ["membership", "--m", "10", "--n", "2", "--z", "2.5", "--frames", "4"],
        ["joint", "--m", "6", "--n", "2", "--z", "2", "--sample", "3"],
        ["fmin", "--m", "8", "--n", "1", "--z", "3", "--trials", "1000", "--seed", "5"],
        ["simulate", "--m", "9", "--n", "2", "--z", "2", "--trials", "70000", "--seed", "5"],
        ["simulate", "--m", "9", "--n", "2", "--z", "2", "--trials", "70000", "--seed", "5", "--max-frames", "12"],
        ["table1", "--trials", "20000", "--seed", "5"],
    ]
    same = [_payload(c + ["--threads", "1"]) == _payload(c + ["--threads", "4"]) for c in commands]
    verdict("C9 identical payloads for --threads 1 vs 4", all(same), f"{sum(same)}/{len(same)} subcommands")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
