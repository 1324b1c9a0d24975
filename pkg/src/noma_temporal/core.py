"""Network parameters, the allocation-vector ensemble and sequence sampling.

A subframe is fully described by which devices hold a resource block, so the
bipartite RB/device graph is never built; only the binary allocation vector
is kept.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

import numpy as np

SeedLike = Union[int, Sequence[int]]


class ParameterError(ValueError):
    """Invalid network parameterization."""


class NonIntegerLoad(ParameterError):
    """z * n is not a whole number of allocations."""


class Overconstrained(ParameterError):
    """Allocation count is outside 1 <= zn < m."""


@dataclass(frozen=True)
class NetworkParams:
    m: int
    n: int
    z: Fraction

    @property
    def zn(self) -> int:
        return int(self.z * self.n)

    @property
    def p(self) -> Fraction:
        return Fraction(self.zn, self.m)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "z": _frac_str(self.z),
            "zn": self.zn,
            "p": _frac_str(self.p),
            "p_float": float(self.p),
        }


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def make_params(m: int, n: int, z) -> NetworkParams:
    """Validate an (m, n, z) triple.

    ``z`` may be any rational (int, Fraction, decimal string such as "2.5")
    as long as ``z * n`` is an integer.
    """
    if isinstance(z, float):
        z = Fraction(z).limit_denominator(10**6)
    z = Fraction(z)
    if m < 1 or n < 1:
        raise ParameterError(f"m and n must be >= 1 (got m={m}, n={n})")
    if z <= 0:
        raise ParameterError(f"overloading ratio must be positive (got z={z})")
    load = z * n
    if load.denominator != 1:
        raise NonIntegerLoad(f"z*n = {load} is not an integer")
    zn = int(load)
    if zn < 1 or zn >= m:
        raise Overconstrained(f"need 1 <= zn < m, got zn={zn}, m={m}")
    return NetworkParams(int(m), int(n), z)


def params_for_load(m: int, zn: int) -> NetworkParams:
    """Params with a single RB carrying all ``zn`` allocations."""
    return make_params(m, 1, zn)


@dataclass(frozen=True)
class AllocationVector:
    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("allocation vector must be binary")

    @classmethod
    def from_indices(cls, m: int, allocated) -> "AllocationVector":
        bits = [0] * m
        for i in allocated:
            bits[i] = 1
        return cls(tuple(bits))

    @classmethod
    def from_string(cls, s: str) -> "AllocationVector":
        return cls(tuple(int(c) for c in s))

    @property
    def m(self) -> int:
        return len(self.bits)

    @property
    def count(self) -> int:
        return sum(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.int64)

    def check(self, params: NetworkParams) -> None:
        if self.m != params.m or self.count != params.zn:
            raise ValueError(
                f"vector {self} invalid for m={params.m}, zn={params.zn}"
            )

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class Frame:
    """One MAC frame: the uplink subframe precedes the downlink subframe."""

    uplink: AllocationVector
    downlink: AllocationVector

    def check(self, params: NetworkParams) -> None:
        self.uplink.check(params)
        self.downlink.check(params)


@dataclass(frozen=True)
class NetworkSequence:
    params: NetworkParams
    frames: tuple[Frame, ...]
    seed: object = None

    def __post_init__(self):
        for frame in self.frames:
            frame.check(self.params)

    def __len__(self) -> int:
        return len(self.frames)

    def uplink_matrix(self) -> np.ndarray:
        """N x m matrix of uplink allocations (rows in temporal order)."""
        return _stack([f.uplink for f in self.frames], self.params.m)

    def downlink_matrix(self) -> np.ndarray:
        return _stack([f.downlink for f in self.frames], self.params.m)


def _stack(vectors, m):
    if not vectors:
        return np.zeros((0, m), dtype=np.int64)
    return np.array([v.bits for v in vectors], dtype=np.int64)


def ensemble_size(params: NetworkParams) -> int:
    return math.comb(params.m, params.zn)


def enumerate_ensemble(params: NetworkParams) -> Iterator[AllocationVector]:
    """Every valid vector once, in descending binary (lexicographic on bits) order."""
    for idx in itertools.combinations(range(params.m), params.zn):
        yield AllocationVector.from_indices(params.m, idx)


def ensemble_array(params: NetworkParams) -> np.ndarray:
    """All C(m, zn) vectors as a bool array, same order as enumerate_ensemble."""
    combos = list(itertools.combinations(range(params.m), params.zn))
    out = np.zeros((len(combos), params.m), dtype=bool)
    rows = np.repeat(np.arange(len(combos)), params.zn)
    out[rows, np.array(combos).ravel()] = True
    return out


def make_rng(seed: SeedLike, *key: int) -> np.random.Generator:
    """Generator for the stream ``key`` under master ``seed``.

    Streams with different keys are statistically independent, so work can be
    split across threads by key without changing results.
    """
    entropy = list(seed) if isinstance(seed, (list, tuple)) else seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy, spawn_key=key)))


def sample_allocation(params: NetworkParams, rng: np.random.Generator) -> AllocationVector:
    chosen = rng.choice(params.m, size=params.zn, replace=False)
    vec = AllocationVector.from_indices(params.m, chosen)
    assert vec.count == params.zn
    return vec


def sample_allocations(params: NetworkParams, rng: np.random.Generator, shape) -> np.ndarray:
    """Batched uniform draws: bool array of ``shape + (m,)`` with zn ones per row.

    Each row is the first zn entries of an exact Fisher-Yates shuffle.
    """
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    rows = math.prod(shape)
    perm = rng.permuted(np.tile(np.arange(params.m), (rows, 1)), axis=1)
    out = np.zeros((rows, params.m), dtype=bool)
    np.put_along_axis(out, perm[:, : params.zn], True, axis=1)
    return out.reshape(shape + (params.m,))


def sample_sequence(params: NetworkParams, N: int, rng) -> NetworkSequence:
    """N frames of independent uniform uplink/downlink draws.

    ``rng`` may be a Generator or a seed; a seed is recorded on the sequence.
    """
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed = rng
        rng = make_rng(rng)
    frames = []
    for _ in range(N):
        ul = sample_allocation(params, rng)
        dl = sample_allocation(params, rng)
        frames.append(Frame(ul, dl))
    return NetworkSequence(params, tuple(frames), seed)


def sequence_from_arrays(params: NetworkParams, ul: np.ndarray, dl: np.ndarray, seed=None) -> NetworkSequence:
    frames = tuple(
        Frame(AllocationVector(tuple(int(b) for b in u)), AllocationVector(tuple(int(b) for b in d)))
        for u, d in zip(ul, dl)
    )
    return NetworkSequence(params, frames, seed)
