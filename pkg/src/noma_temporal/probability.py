"""Exact allocation and component-membership probabilities.

Everything here works in ``fractions.Fraction`` so closed forms can be
compared to enumeration oracles with ``==``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from noma_temporal.core import Frame, NetworkParams


class MembershipClass(enum.Enum):
    STRONG = "strong"
    WEAK_ONLY = "weak_only"
    ISOLATED = "isolated"


@dataclass(frozen=True)
class Pmf:
    """Probability mass on the integers ``start .. start + len(masses) - 1``."""

    masses: tuple[Fraction, ...]
    start: int = 0

    @property
    def support(self) -> range:
        return range(self.start, self.start + len(self.masses))

    def mass(self, k: int) -> Fraction:
        if k in self.support:
            return self.masses[k - self.start]
        return Fraction(0)

    def total(self) -> Fraction:
        return sum(self.masses, Fraction(0))

    def items(self):
        return zip(self.support, self.masses)

    def mean(self) -> Fraction:
        return sum((k * w for k, w in self.items()), Fraction(0))


def binomial_pmf(N: int, p) -> Pmf:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    q = 1 - p
    return Pmf(tuple(comb(N, k) * p**k * q ** (N - k) for k in range(N + 1)))


def class_probability(params: NetworkParams, cls: MembershipClass) -> Fraction:
    p = params.p
    if cls is MembershipClass.STRONG:
        return p * p
    if cls is MembershipClass.WEAK_ONLY:
        return 2 * p * (1 - p)
    return (1 - p) ** 2


def classify_bits(ul: int, dl: int) -> MembershipClass:
    if ul and dl:
        return MembershipClass.STRONG
    if ul or dl:
        return MembershipClass.WEAK_ONLY
    return MembershipClass.ISOLATED


def classify_frame(frame: Frame, nd: int) -> MembershipClass:
    m = frame.uplink.m
    if not 0 <= nd < m:
        raise IndexError(f"device index {nd} out of range for m={m}")
    return classify_bits(frame.uplink.bits[nd], frame.downlink.bits[nd])


def membership_count_pmf(params: NetworkParams, N: int, cls: MembershipClass) -> Pmf:
    """Distribution of the number of frames (out of N) an ND spends in ``cls``."""
    return binomial_pmf(N, class_probability(params, cls))


def hypergeometric_pmf(population: int, successes: int, draws: int, k: int) -> Fraction:
    """P[k successes in ``draws`` without replacement]; 0 off-support."""
    if k < 0 or k > draws or k > successes or draws - k > population - successes:
        return Fraction(0)
    return Fraction(comb(successes, k) * comb(population - successes, draws - k), comb(population, draws))


def joint_unlabeled_pmf(params: NetworkParams, m_s: int, k: int) -> Fraction:
    """P[exactly k of m_s given NDs hold an RB in one subframe]."""
    if m_s > params.m:
        raise ValueError(f"sample size {m_s} exceeds m={params.m}")
    return hypergeometric_pmf(params.m, params.zn, m_s, k)


def joint_labeled_prob(params: NetworkParams, m_s: int, k: int) -> Fraction:
    """Probability of one specific labeled pattern with k allocated NDs among m_s."""
    if k < 0 or k > m_s:
        return Fraction(0)
    return joint_unlabeled_pmf(params, m_s, k) / comb(m_s, k)


def joint_table(params: NetworkParams, m_s: int) -> list[dict]:
    rows = []
    for k in range(m_s + 1):
        unl = joint_unlabeled_pmf(params, m_s, k)
        lab = joint_labeled_prob(params, m_s, k)
        rows.append({"k": k, "unlabeled": unl, "labeled": lab, "patterns": comb(m_s, k)})
    return rows
