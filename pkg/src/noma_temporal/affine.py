"""Matrix engine: potential matrices, queue recurrence, static projection, affine graph.

Row index is the transmitting device, column index the receiver. An uplink
allocation for device i makes row i of the uplink potential all ones (except
the diagonal); a downlink allocation for j does the same for column j.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from noma_temporal.core import AllocationVector, Frame, NetworkParams, NetworkSequence


def _offdiag(m: int) -> np.ndarray:
    return 1 - np.eye(m, dtype=np.int64)


def uplink_potential(d: AllocationVector) -> np.ndarray:
    v = d.as_array()
    return _offdiag(len(v)) * v[:, None]


def downlink_potential(d: AllocationVector) -> np.ndarray:
    v = d.as_array()
    return _offdiag(len(v)) * v[None, :]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class AffineState:
    Q: np.ndarray
    S: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, m: int) -> "AffineState":
        return cls(_frozen(np.zeros((m, m), np.int64)), _frozen(np.zeros((m, m), np.int64)), 0)

    @property
    def m(self) -> int:
        return self.Q.shape[0]

    def __eq__(self, other):
        if not isinstance(other, AffineState):
            return NotImplemented
        return self.t == other.t and np.array_equal(self.Q, other.Q) and np.array_equal(self.S, other.S)


def frame_connectivity(state: AffineState, frame: Frame) -> np.ndarray:
    """Deliveries achieved in ``frame`` given the queue carried in ``state``."""
    p_ul = uplink_potential(frame.uplink)
    p_dl = downlink_potential(frame.downlink)
    return ((p_ul + state.Q) > 0).astype(np.int64) * p_dl


def step(state: AffineState, frame: Frame) -> AffineState:
    if frame.uplink.m != state.m or frame.downlink.m != state.m:
        raise ValueError("frame dimension does not match state")
    p_ul = uplink_potential(frame.uplink)
    f = frame_connectivity(state, frame)
    q = p_ul + state.Q - f
    return AffineState(_frozen(q), _frozen(state.S + f), state.t + 1)


def run(frames: Iterable[Frame], m: int, state: Optional[AffineState] = None) -> AffineState:
    state = AffineState.initial(m) if state is None else state
    for frame in frames:
        state = step(state, frame)
    return state


def project(seq: NetworkSequence, start: int = 0, stop: Optional[int] = None) -> AffineState:
    """Replay frames ``start..stop-1`` from an empty queue (observation window)."""
    return run(seq.frames[start:stop], seq.params.m)


def static_projection(state: AffineState) -> np.ndarray:
    return state.S


def affine_graph(S: np.ndarray) -> np.ndarray:
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("S must be square")
    return ((S * S.T) > 0).astype(np.int64)


def is_complete(A: np.ndarray) -> bool:
    A = np.asarray(A)
    m = A.shape[0]
    return bool(np.all(A[~np.eye(m, dtype=bool)] == 1))


def frames_to_completion(params: NetworkParams, frames: Iterable[Frame], max_frames: int) -> Optional[int]:
    """First t <= max_frames at which the affine graph is complete, else None."""
    state = AffineState.initial(params.m)
    if max_frames <= 0:
        return None
    for frame in frames:
        state = step(state, frame)
        if is_complete(affine_graph(state.S)):
            return state.t
        if state.t >= max_frames:
            break
    return None


def pair_reachability_oracle(seq: NetworkSequence, stop: Optional[int] = None) -> np.ndarray:
    """Direct check of i -> j delivery: an uplink of i at t1 and a downlink of j at t2 >= t1.

    Independent of the queue recurrence; used to cross-check it.
    """
    m = seq.params.m
    frames = seq.frames[:stop]
    out = np.zeros((m, m), dtype=np.int64)
    for t1, f1 in enumerate(frames):
        senders = [i for i, b in enumerate(f1.uplink.bits) if b]
        for f2 in frames[t1:]:
            for j, b in enumerate(f2.downlink.bits):
                if b:
                    for i in senders:
                        if i != j:
                            out[i, j] = 1
    return out


# Batched engine: used by the Monte Carlo harness and the exhaustive oracles.
# ul, dl: bool arrays shaped (batch, frames, m).


def batch_first_completion(ul: np.ndarray, dl: np.ndarray, check_queue: bool = False) -> np.ndarray:
    """Frame index (1-based) of first complete affine graph per sequence, 0 if never."""
    B, F, m = ul.shape
    off = ~np.eye(m, dtype=bool)
    qtype = np.int16 if F < 2**15 else np.int64
    Q = np.zeros((B, m, m), dtype=qtype)
    reached = np.zeros((B, m, m), dtype=bool)
    first = np.zeros(B, dtype=np.int64)
    for t in range(F):
        p_ul = ul[:, t, :, None] & off
        p_dl = dl[:, t, None, :] & off
        Q += p_ul
        f = (Q > 0) & p_dl
        Q -= f
        reached |= f
        if check_queue:
            assert (Q >= 0).all()
            assert not Q[:, np.arange(m), np.arange(m)].any()
        done = reached & reached.transpose(0, 2, 1)
        complete = np.count_nonzero(done.reshape(B, -1), axis=1) == m * (m - 1)
        first[(first == 0) & complete] = t + 1
    return first


def batch_static_projection(ul: np.ndarray, dl: np.ndarray) -> np.ndarray:
    B, F, m = ul.shape
    off = ~np.eye(m, dtype=bool)
    Q = np.zeros((B, m, m), dtype=np.int32)
    S = np.zeros((B, m, m), dtype=np.int32)
    for t in range(F):
        p_ul = (ul[:, t, :, None] & off).astype(np.int32)
        p_dl = dl[:, t, None, :] & off
        f = (((p_ul + Q) > 0) & p_dl).astype(np.int32)
        Q += p_ul - f
        S += f
    return S
