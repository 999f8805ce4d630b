"""Rate-1/3 turbo code: parallel concatenation of two identical RSC encoders.

Encoder: recursive systematic convolutional constituents with octal
generators (feedback, feedforward) = (13, 15), memory 3.  The second
constituent is fed through a seeded pseudo-random interleaver.  Both
trellises are terminated independently with 3 tail steps each, so a k-bit
info block yields 3k + 12 coded bits laid out as

    [ systematic k | parity1 k | parity2 k | tail1 (3 sys/parity pairs) | tail2 ]

Decoder: iterative exchange of extrinsic information between two SISO
BCJR decoders, batch-vectorized over frames (the forward/backward
recursions run one python step per trellis stage on [batch, 8] arrays).
LLR convention throughout: positive <=> bit 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidConfig, ShapeMismatch

_NEG_INF = -1e30


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class TurboConfig:
    """Constituent code and decoding parameters."""

    feedback_poly: int = 0o13
    forward_poly: int = 0o15
    memory: int = 3
    interleaver_seed: int = 0
    iterations: int = 8
    metric: str = "max-log"  # or "log-map"

    def __post_init__(self):
        m = self.memory
        for name, poly in (("feedback", self.feedback_poly), ("forward", self.forward_poly)):
            if not (1 << m) <= poly < (1 << (m + 1)):
                raise InvalidConfig(
                    f"{name} polynomial {poly:#o} inconsistent with memory {m}"
                )
        if self.iterations < 1:
            raise InvalidConfig("need at least one decoding iteration")
        if self.metric not in ("max-log", "log-map"):
            raise InvalidConfig(f"unknown decoder metric {self.metric!r}")

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    @property
    def tail_bits(self) -> int:
        """Termination overhead: 2 bits per tail step, both trellises."""
        return 4 * self.memory

    def coded_length(self, k: int) -> int:
        return 3 * k + self.tail_bits


class _Trellis:
    """Lookup tables for one RSC constituent, derived from the polynomials."""

    def __init__(self, cfg: TurboConfig):
        m = cfg.memory
        n = cfg.n_states
        state_mask = n - 1
        self.n_states = n
        self.next_state = np.zeros((2, n), dtype=np.int64)
        self.parity = np.zeros((2, n), dtype=np.int64)
        self.tail_input = np.zeros(n, dtype=np.int64)
        for s in range(n):
            fb = _parity(cfg.feedback_poly & state_mask & s)
            self.tail_input[s] = fb  # input that drives the feedback bit to 0
            for u in (0, 1):
                a = u ^ fb
                self.next_state[u, s] = (a << (m - 1)) | (s >> 1)
                self.parity[u, s] = _parity(cfg.forward_poly & ((a << m) | s))
        # inverse maps: prev_state[u, s'] = s with next_state[u, s] = s'
        self.prev_state = np.zeros((2, n), dtype=np.int64)
        for u in (0, 1):
            self.prev_state[u, self.next_state[u]] = np.arange(n)
        # +1 for bit 0, -1 for bit 1
        self.parity_sign = 1.0 - 2.0 * self.parity
        # forced tail branch: input bit, resulting parity, next state (a = 0)
        self.tail_sign = (1.0 - 2.0 * self.tail_input).astype(np.float64)
        self.tail_parity_sign = np.array(
            [1.0 - 2.0 * _parity(cfg.forward_poly & s) for s in range(n)]
        )
        self.tail_next = np.arange(n) >> 1


def make_interleaver(k: int, seed: int) -> np.ndarray:
    """Pseudo-random bijective permutation of length k."""
    return np.random.default_rng(seed).permutation(k)


def _rsc_encode(bits: np.ndarray, trellis: _Trellis, memory: int):
    """Batched RSC pass: returns (parity [B,k], tail_sys [B,m], tail_par [B,m])."""
    b, k = bits.shape
    parity = np.zeros((b, k), dtype=np.int64)
    state = np.zeros(b, dtype=np.int64)
    for t in range(k):
        u = bits[:, t]
        parity[:, t] = trellis.parity[u, state]
        state = trellis.next_state[u, state]
    tail_sys = np.zeros((b, memory), dtype=np.int64)
    tail_par = np.zeros((b, memory), dtype=np.int64)
    for t in range(memory):
        u = trellis.tail_input[state]
        tail_sys[:, t] = u
        tail_par[:, t] = trellis.parity[u, state]
        state = trellis.next_state[u, state]
    if np.any(state != 0):
        raise InvalidConfig("termination failed to reach the zero state")
    return parity, tail_sys, tail_par


def turbo_encode(info_bits: np.ndarray, cfg: TurboConfig) -> np.ndarray:
    """Encode info bits ([k] or [B, k]) to [.., 3k + 12] coded bits."""
    bits = np.asarray(info_bits, dtype=np.int64)
    single = bits.ndim == 1
    if single:
        bits = bits[None]
    if bits.ndim != 2 or bits.shape[1] == 0:
        raise ShapeMismatch("info bits must be a nonempty 1-D or 2-D {0,1} array")
    b, k = bits.shape
    trellis = _Trellis(cfg)
    perm = make_interleaver(k, cfg.interleaver_seed)
    p1, t1s, t1p = _rsc_encode(bits, trellis, cfg.memory)
    p2, t2s, t2p = _rsc_encode(bits[:, perm], trellis, cfg.memory)
    tail1 = np.stack([t1s, t1p], axis=-1).reshape(b, -1)
    tail2 = np.stack([t2s, t2p], axis=-1).reshape(b, -1)
    coded = np.concatenate([bits, p1, p2, tail1, tail2], axis=1)
    return coded[0] if single else coded


def _bcjr(sys_llr, par_llr, prior_llr, tail_sys, tail_par, trellis: _Trellis, metric: str):
    """One SISO pass; returns posterior info-bit LLRs [B, k].

    Works in the log domain with per-step normalization; ``metric``
    selects max (max-log) or log-sum-exp (exact log-MAP) combining.
    """
    b, k = sys_llr.shape
    n = trellis.n_states
    if metric == "max-log":
        combine = np.maximum

        def reduce_states(x):
            return x.max(axis=-1)

    else:
        combine = np.logaddexp

        def reduce_states(x):
            return np.logaddexp.reduce(x, axis=-1)

    half_su = 0.5 * (sys_llr + prior_llr)  # [B, k]
    half_p = 0.5 * par_llr
    # branch metrics per input bit: gamma_u[t][B, n]
    g0 = half_su[..., None] + half_p[..., None] * trellis.parity_sign[0]  # u=0 sign +1
    g1 = -half_su[..., None] + half_p[..., None] * trellis.parity_sign[1]

    alpha = np.full((k + 1, b, n), _NEG_INF, dtype=np.float64)
    alpha[0, :, 0] = 0.0
    prev0, prev1 = trellis.prev_state
    for t in range(k):
        a0 = (alpha[t] + g0[:, t])[:, prev0]
        a1 = (alpha[t] + g1[:, t])[:, prev1]
        nxt = combine(a0, a1)
        alpha[t + 1] = nxt - nxt.max(axis=1, keepdims=True)

    # beta over the forced-branch tail section, from the all-zero final state
    beta = np.full((b, n), _NEG_INF, dtype=np.float64)
    beta[:, 0] = 0.0
    m = tail_sys.shape[1]
    for t in range(m - 1, -1, -1):
        g_tail = 0.5 * (
            tail_sys[:, t : t + 1] * trellis.tail_sign + tail_par[:, t : t + 1] * trellis.tail_parity_sign
        )
        beta = g_tail + beta[:, trellis.tail_next]
        beta -= beta.max(axis=1, keepdims=True)

    to0, to1 = trellis.next_state
    posterior = np.empty((b, k), dtype=np.float64)
    for t in range(k - 1, -1, -1):
        m0 = alpha[t] + g0[:, t] + beta[:, to0]
        m1 = alpha[t] + g1[:, t] + beta[:, to1]
        posterior[:, t] = reduce_states(m0) - reduce_states(m1)
        nxt = combine(g0[:, t] + beta[:, to0], g1[:, t] + beta[:, to1])
        beta = nxt - nxt.max(axis=1, keepdims=True)
    return posterior


def turbo_decode(llrs: np.ndarray, cfg: TurboConfig, iterations: int | None = None) -> np.ndarray:
    """Iteratively decode coded-bit LLRs ([L] or [B, L]) to info bits.

    L must equal 3k + 12 for some k; the hard decision is taken after the
    configured number of iterations (positive LLR -> bit 0).
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    single = llrs.ndim == 1
    if single:
        llrs = llrs[None]
    iters = cfg.iterations if iterations is None else iterations
    if iters < 1:
        raise InvalidConfig("need at least one decoding iteration")
    length = llrs.shape[1]
    k, rem = divmod(length - cfg.tail_bits, 3)
    if rem or k <= 0:
        raise ShapeMismatch(f"coded length {length} is not 3k + {cfg.tail_bits}")
    trellis = _Trellis(cfg)
    perm = make_interleaver(k, cfg.interleaver_seed)
    inv_perm = np.argsort(perm)

    ls = llrs[:, :k]
    lp1 = llrs[:, k : 2 * k]
    lp2 = llrs[:, 2 * k : 3 * k]
    tail1 = llrs[:, 3 * k : 3 * k + 2 * cfg.memory]
    tail2 = llrs[:, 3 * k + 2 * cfg.memory :]
    t1s, t1p = tail1[:, 0::2], tail1[:, 1::2]
    t2s, t2p = tail2[:, 0::2], tail2[:, 1::2]
    ls_int = ls[:, perm]

    ext2 = np.zeros_like(ls)
    post2 = ls_int.copy()
    for _ in range(iters):
        post1 = _bcjr(ls, lp1, ext2, t1s, t1p, trellis, cfg.metric)
        ext1 = post1 - ls - ext2
        post2 = _bcjr(ls_int, lp2, ext1[:, perm], t2s, t2p, trellis, cfg.metric)
        ext2 = (post2 - ls_int - ext1[:, perm])[:, inv_perm]
    bits = (post2[:, inv_perm] < 0).astype(np.int64)
    return bits[0] if single else bits
