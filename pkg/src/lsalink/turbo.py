"""Rate-1/3 parallel concatenated turbo code with a QPP interleaver.

Constituent encoders are the LTE 8-state recursive systematic codes with
feedback 1 + D^2 + D^3 and feedforward 1 + D + D^3, each terminated by three
tail steps. Decoding is iterative max-log-MAP with scaled extrinsic exchange.

Codeword layout (length 3K + 12)::

    x0 z0 z'0 x1 z1 z'1 ... x(K-1) z(K-1) z'(K-1)   tail1: xK zK ... (6)   tail2: x'K z'K ... (6)

LLRs use the convention ``log P(bit=0) / P(bit=1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

NUM_STATES = 8
TAIL_STEPS = 3

# QPP coefficients per block length. K=40 is the first LTE table row; K=616 is
# not an LTE size, its pair was picked for maximum spread among bijective pairs.
QPP_TABLE = {
    40: (3, 10),
    616: (17, 308),
}

PAYLOAD_BITS = 614
FILLER_BITS = 2


def _trellis():
    next_state = np.zeros((NUM_STATES, 2), dtype=np.int64)
    parity = np.zeros((NUM_STATES, 2), dtype=np.int64)
    tail_input = np.zeros(NUM_STATES, dtype=np.int64)
    for s in range(NUM_STATES):
        s1, s2, s3 = (s >> 2) & 1, (s >> 1) & 1, s & 1
        fb = s2 ^ s3
        tail_input[s] = fb
        for u in (0, 1):
            a = u ^ fb
            parity[s, u] = a ^ s1 ^ s3
            next_state[s, u] = (a << 2) | (s1 << 1) | s2
    return next_state, parity, tail_input


NEXT_STATE, PARITY, TAIL_INPUT = _trellis()


@dataclass(frozen=True)
class TurboConfig:
    info_length: int = 616
    f1: int = 17
    f2: int = 308
    max_iterations: int = 8
    early_stop: bool = True
    extrinsic_scale: float = 0.75

    def __post_init__(self):
        if self.info_length < 1:
            raise ValueError("info_length must be positive")
        if self.f1 % 2 == 0:
            raise ValueError(f"f1 must be odd, got {self.f1}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @classmethod
    def for_length(cls, K: int, **kwargs) -> "TurboConfig":
        if K not in QPP_TABLE:
            raise ValueError(f"no interleaver parameters for K={K}; pass f1/f2 explicitly")
        f1, f2 = QPP_TABLE[K]
        return cls(info_length=K, f1=f1, f2=f2, **kwargs)

    @property
    def codeword_length(self) -> int:
        return 3 * self.info_length + 4 * TAIL_STEPS

    @property
    def rate(self) -> float:
        return self.info_length / self.codeword_length


def qpp_permutation(cfg: TurboConfig) -> np.ndarray:
    """``pi(i) = (f1 i + f2 i^2) mod K``; the interleaved sequence is ``bits[pi]``."""
    K = cfg.info_length
    i = np.arange(K, dtype=np.int64)
    # reduce before squaring to stay in int64 range
    perm = (cfg.f1 * i + cfg.f2 * ((i * i) % K)) % K
    if np.unique(perm).size != K:
        raise ValueError(f"(K={K}, f1={cfg.f1}, f2={cfg.f2}) is not a permutation")
    return perm


def _rsc_encode(bits: np.ndarray):
    state = 0
    par = np.empty(bits.size, dtype=np.int8)
    for k, u in enumerate(bits):
        par[k] = PARITY[state, u]
        state = NEXT_STATE[state, u]
    tail = np.empty(2 * TAIL_STEPS, dtype=np.int8)
    for t in range(TAIL_STEPS):
        u = TAIL_INPUT[state]
        tail[2 * t] = u
        tail[2 * t + 1] = PARITY[state, u]
        state = NEXT_STATE[state, u]
    assert state == 0
    return par, tail


def turbo_encode(bits, cfg: TurboConfig) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).ravel()
    K = cfg.info_length
    if bits.size != K:
        raise ValueError(f"expected {K} information bits, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0/1")
    perm = qpp_permutation(cfg)
    p1, tail1 = _rsc_encode(bits)
    p2, tail2 = _rsc_encode(bits[perm])
    body = np.stack([bits.astype(np.int8), p1, p2], axis=1).ravel()
    return np.concatenate([body, tail1, tail2])


@numba.njit(cache=True)
def _max_log_siso(lsys, lpar, lapr, tsys, tpar, next_state, parity, tail_input):
    """One constituent max-log-MAP pass; returns a-posteriori LLRs of the K info bits."""
    K = lsys.size
    T = tsys.size
    n = K + T
    neg = -1e300
    alpha = np.full((n + 1, 8), neg)
    alpha[0, 0] = 0.0
    for k in range(K):
        ls = 0.5 * (lsys[k] + lapr[k])
        lp = 0.5 * lpar[k]
        for s in range(8):
            a = alpha[k, s]
            if a <= neg:
                continue
            for u in range(2):
                g = (ls if u == 0 else -ls) + (lp if parity[s, u] == 0 else -lp)
                ns = next_state[s, u]
                v = a + g
                if v > alpha[k + 1, ns]:
                    alpha[k + 1, ns] = v
    for t in range(T):
        k = K + t
        for s in range(8):
            a = alpha[k, s]
            if a <= neg:
                continue
            u = tail_input[s]
            g = (0.5 * tsys[t] if u == 0 else -0.5 * tsys[t]) + (
                0.5 * tpar[t] if parity[s, u] == 0 else -0.5 * tpar[t]
            )
            ns = next_state[s, u]
            v = a + g
            if v > alpha[k + 1, ns]:
                alpha[k + 1, ns] = v

    beta = np.full(8, neg)
    beta[0] = 0.0
    for t in range(T - 1, -1, -1):
        nb = np.full(8, neg)
        for s in range(8):
            u = tail_input[s]
            ns = next_state[s, u]
            if beta[ns] <= neg:
                continue
            g = (0.5 * tsys[t] if u == 0 else -0.5 * tsys[t]) + (
                0.5 * tpar[t] if parity[s, u] == 0 else -0.5 * tpar[t]
            )
            nb[s] = beta[ns] + g
        beta = nb

    out = np.empty(K)
    for k in range(K - 1, -1, -1):
        ls = 0.5 * (lsys[k] + lapr[k])
        lp = 0.5 * lpar[k]
        best0 = neg
        best1 = neg
        nb = np.full(8, neg)
        for s in range(8):
            a = alpha[k, s]
            for u in range(2):
                ns = next_state[s, u]
                b = beta[ns]
                if b <= neg:
                    continue
                g = (ls if u == 0 else -ls) + (lp if parity[s, u] == 0 else -lp)
                if b + g > nb[s]:
                    nb[s] = b + g
                if a <= neg:
                    continue
                m = a + g + b
                if u == 0:
                    if m > best0:
                        best0 = m
                else:
                    if m > best1:
                        best1 = m
        out[k] = best0 - best1
        # renormalize to keep metrics bounded over long blocks
        top = nb.max()
        for s in range(8):
            beta[s] = nb[s] - top if nb[s] > neg else neg
    return out


def _split_llrs(llrs: np.ndarray, K: int):
    body = llrs[: 3 * K].reshape(K, 3)
    t1 = llrs[3 * K : 3 * K + 6]
    t2 = llrs[3 * K + 6 : 3 * K + 12]
    return body[:, 0], body[:, 1], body[:, 2], t1[0::2], t1[1::2], t2[0::2], t2[1::2]


def turbo_decode(llrs, cfg: TurboConfig):
    """Iterative max-log-MAP decoding.

    Returns ``(bits, iterations)``. With early stopping the loop ends as soon
    as both constituent decoders make the same hard decisions.
    """
    llrs = np.asarray(llrs, dtype=float).ravel()
    K = cfg.info_length
    if llrs.size != cfg.codeword_length:
        raise ValueError(f"expected {cfg.codeword_length} LLRs, got {llrs.size}")
    perm = qpp_permutation(cfg)
    lsys, lp1, lp2, ts1, tp1, ts2, tp2 = _split_llrs(llrs, K)
    lsys = np.ascontiguousarray(lsys)
    lsys_i = np.ascontiguousarray(lsys[perm])
    lp1 = np.ascontiguousarray(lp1)
    lp2 = np.ascontiguousarray(lp2)
    ts1, tp1 = np.ascontiguousarray(ts1), np.ascontiguousarray(tp1)
    ts2, tp2 = np.ascontiguousarray(ts2), np.ascontiguousarray(tp2)

    apriori1 = np.zeros(K)
    decided = np.zeros(K, dtype=np.int8)
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        app1 = _max_log_siso(lsys, lp1, apriori1, ts1, tp1, NEXT_STATE, PARITY, TAIL_INPUT)
        ext1 = app1 - apriori1 - lsys
        apriori2 = cfg.extrinsic_scale * ext1[perm]
        app2 = _max_log_siso(lsys_i, lp2, apriori2, ts2, tp2, NEXT_STATE, PARITY, TAIL_INPUT)
        ext2 = app2 - apriori2 - lsys_i
        apriori1 = np.empty(K)
        apriori1[perm] = cfg.extrinsic_scale * ext2
        decided = np.empty(K, dtype=np.int8)
        decided[perm] = (app2 < 0).astype(np.int8)
        if cfg.early_stop and np.array_equal(decided, (app1 < 0).astype(np.int8)):
            break
    return decided, it


def padded_block(payload: np.ndarray, cfg: TurboConfig) -> np.ndarray:
    """Append zero filler bits so the payload fills the interleaver length."""
    pad = cfg.info_length - payload.size
    if pad < 0:
        raise ValueError("payload longer than the code block")
    return np.concatenate([payload, np.zeros(pad, dtype=payload.dtype)])

