"""Minimum frame counts for a complete affine graph and their probabilities.

Closed forms cover the cases where the minimal schedule is essentially unique.
For the remaining case (m mod zn > 1) the probability comes from an exact
dynamic program over coverage counts, built on this characterization: after F
frames the affine graph is complete iff, for every ordered pair i != j, the
first uplink of i is no later than the last downlink of j.

With M the latest first-uplink time, every receiver must downlink in [M, F];
if a single device i* is the only one first uplinking at M, i* only needs a
downlink no earlier than the previous first-uplink time. Uplink and downlink
draws are independent, and the downlink condition on a window depends only on
how many devices stay uncovered, so the whole event reduces to two small
Markov chains on "uncovered device" counts.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, comb
from typing import Optional

import numpy as np

from noma_temporal.core import NetworkParams, ParameterError, ensemble_array
from noma_temporal.probability import hypergeometric_pmf


class NoCase(ParameterError):
    """Parameters fall outside every analysed case (zn <= 1 outside Case 1)."""


class InfeasibleExact(RuntimeError):
    """Exact method over budget and no Monte Carlo fallback requested."""


class CaseId(enum.Enum):
    CASE1 = "1"
    CASE2 = "2"
    CASE3_1 = "3.1"
    CASE3_2 = "3.2"
    CASE3_3 = "3.3"


class Method(enum.Enum):
    CLOSED_FORM = "closed_form"
    ENUMERATIVE = "enumerative"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class FminResult:
    case: CaseId
    f_min: int
    probability: Fraction
    method: Method
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    trials: Optional[int] = None

    @property
    def probability_float(self) -> float:
        return float(self.probability)

    def as_dict(self) -> dict:
        out = {
            "case": self.case.value,
            "f_min": self.f_min,
            "pr": f"{self.probability.numerator}/{self.probability.denominator}",
            "pr_float": self.probability_float,
            "method": self.method.value,
        }
        if self.method is Method.MONTE_CARLO:
            out.update(ci_low=self.ci_low, ci_high=self.ci_high, trials=self.trials)
        return out


def classify_case(params: NetworkParams) -> CaseId:
    m, zn = params.m, params.zn
    if zn == m - 1:
        return CaseId.CASE1
    # rational comparison: odd m needs zn >= ceil(m/2)
    if Fraction(m, 2) <= zn < m - 1:
        return CaseId.CASE2
    if zn <= 1:
        raise NoCase(f"no case covers zn={zn}, m={m}")
    r = m % zn
    if r == 0:
        return CaseId.CASE3_1
    if r == 1:
        return CaseId.CASE3_2
    return CaseId.CASE3_3


def min_frames(params: NetworkParams) -> int:
    m, zn = params.m, params.zn
    case = classify_case(params)
    if case is CaseId.CASE1:
        return 2
    if case is CaseId.CASE2:
        return 3
    if case is CaseId.CASE3_1:
        return 2 * m // zn - 1
    if case is CaseId.CASE3_2:
        return 2 * (m // zn)
    return 2 * ceil(Fraction(m, zn)) - 1


def case1_probability(params: NetworkParams) -> Fraction:
    p = params.p
    return p * p * (1 - p)


def case2_probability(params: NetworkParams) -> Fraction:
    m, zn = params.m, params.zn
    return Fraction(comb(zn, 2 * zn - m), comb(m, zn)) ** 2


def half_load_probability(m: int) -> Fraction:
    """Case 2 at its lower boundary zn = m/2."""
    return Fraction(1, comb(m, m // 2) ** 2)


def case31_probability(params: NetworkParams) -> Fraction:
    m, zn = params.m, params.zn
    total = Fraction(1)
    for i in range(1, m // zn):
        total *= Fraction(comb(m - i * zn, zn) ** 2, comb(m, zn) ** 2)
    return total


def case32_probability(params: NetworkParams) -> Fraction:
    m, zn = params.m, params.zn
    alpha = m // zn
    num = comb(m - 1, zn - 1) ** 2
    for i in range(1, alpha):
        num *= comb(m - i * zn, zn)
    for j in range(alpha):
        num *= comb(m - 1 - j * zn, zn)
    return Fraction(num, comb(m, zn) ** (2 * alpha + 1))


_CLOSED_FORMS = {
    CaseId.CASE1: case1_probability,
    CaseId.CASE2: case2_probability,
    CaseId.CASE3_1: case31_probability,
    CaseId.CASE3_2: case32_probability,
}


def pr_fmin(params: NetworkParams, trials: int = 0, seed=0, **kw) -> FminResult:
    case = classify_case(params)
    if case is CaseId.CASE3_3:
        return pr_fmin_case33(params, trials, seed, **kw)
    return FminResult(case, min_frames(params), _CLOSED_FORMS[case](params), Method.CLOSED_FORM)


# -- exact coverage DP -------------------------------------------------------


def _coverage_step(m: int, zn: int, u: int):
    """Yield (newly covered, probability) for one subframe with u uncovered devices."""
    for k in range(min(u, zn) + 1):
        w = hypergeometric_pmf(m, u, zn, k)
        if w:
            yield k, w


def coverage_distribution(m: int, zn: int, steps: int) -> list[dict[int, Fraction]]:
    """dist[w][u] = P[u devices uncovered after w independent subframes]."""
    dist = [{m: Fraction(1)}]
    for _ in range(steps):
        nxt: dict[int, Fraction] = {}
        for u, pu in dist[-1].items():
            for k, w in _coverage_step(m, zn, u):
                nxt[u - k] = nxt.get(u - k, Fraction(0)) + pu * w
        dist.append(nxt)
    return dist


def dp_state_count(params: NetworkParams, frames: int) -> int:
    """Upper bound on DP states: (uncovered count, last covering time) per step."""
    return (params.m + 1) * (frames + 1) * frames


def completion_probability(params: NetworkParams, frames: int) -> Fraction:
    """Exact P[affine graph complete after ``frames`` frames] for any params."""
    m, zn = params.m, params.zn
    F = frames
    if F <= 0:
        return Fraction(0)
    q = 1 - params.p
    dl = coverage_distribution(m, zn, F)

    # uplink chain; state (uncovered, time of last step that covered someone)
    states: dict[tuple[int, int], Fraction] = {(m, 0): Fraction(1)}
    total = Fraction(0)
    for t in range(1, F + 1):
        nxt: dict[tuple[int, int], Fraction] = {}
        for (u, last), pu in states.items():
            for k, w in _coverage_step(m, zn, u):
                pr = pu * w
                if u - k == 0:
                    window = F - t + 1
                    all_cov = dl[window].get(0, Fraction(0))
                    if u >= 2:
                        total += pr * all_cov
                    else:
                        # single straggler: it may take its downlink in [last, t-1]
                        one_left = dl[window].get(1, Fraction(0)) / m
                        early = 1 - q ** (t - last)
                        total += pr * (all_cov + one_left * early)
                else:
                    key = (u - k, t if k else last)
                    nxt[key] = nxt.get(key, Fraction(0)) + pr
        states = nxt
    return total


def pr_fmin_case33(
    params: NetworkParams,
    trials: int = 0,
    seed=0,
    max_states: int = 10**6,
    threads: Optional[int] = None,
) -> FminResult:
    """Case 3.3 probability: exact DP when affordable, otherwise Monte Carlo."""
    case = classify_case(params)
    if case is not CaseId.CASE3_3:
        raise ValueError(f"params are {case.value}, not 3.3")
    f = min_frames(params)
    if dp_state_count(params, f) <= max_states:
        return FminResult(case, f, completion_probability(params, f), Method.ENUMERATIVE)
    if trials <= 0:
        raise InfeasibleExact(f"DP exceeds {max_states} states and trials=0")
    from noma_temporal.montecarlo import estimate_pr_fmin

    rep = estimate_pr_fmin(params, trials, seed, threads=threads)
    return FminResult(
        case,
        f,
        Fraction(rep.successes, rep.trials),
        Method.MONTE_CARLO,
        ci_low=rep.ci_low,
        ci_high=rep.ci_high,
        trials=rep.trials,
    )


# -- brute-force oracle --------------------------------------------------------


def enumerate_completion_probability(params: NetworkParams, frames: int, budget: int = 2 * 10**7) -> Fraction:
    """Exact completion fraction over every sequence of ``frames`` frames.

    Runs the matrix engine on all C(m, zn)^(2 * frames) subframe sequences.
    """
    from noma_temporal.affine import batch_first_completion

    ens = ensemble_array(params)
    E = len(ens)
    subframes = 2 * frames
    total = E**subframes
    if total > budget:
        raise InfeasibleExact(f"{total} sequences exceed budget {budget}")
    # fix a prefix of subframes per chunk, vectorise over the rest
    inner = min(subframes, max(1, int(np.log(2 * 10**5) / np.log(E)))) if E > 1 else subframes
    outer = subframes - inner
    inner_idx = np.array(list(itertools.product(range(E), repeat=inner)), dtype=np.int64).reshape(-1, inner)
    hits = 0
    for prefix in itertools.product(range(E), repeat=outer):
        idx = np.concatenate([np.tile(np.array(prefix, dtype=np.int64), (len(inner_idx), 1)), inner_idx], axis=1)
        sub = ens[idx]  # (B, 2F, m); subframes alternate UL, DL
        first = batch_first_completion(sub[:, 0::2], sub[:, 1::2])
        hits += int(np.count_nonzero(first > 0))
    return Fraction(hits, total)
