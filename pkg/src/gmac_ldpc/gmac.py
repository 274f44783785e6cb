"""T-user Gaussian MAC: channel model, functional-node marginalization, joint decoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .ldpc import LLR_MAX, BpDecoder, clamp
from .protograph import LiftedCode


@dataclass(frozen=True)
class ChannelConfig:
    """Equal-power binary-input GMAC: y = sum_t x_t + z, z ~ N(0, N0/2)."""

    T: int
    P: float
    N0: float

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.P <= 0 or self.N0 <= 0:
            raise ValueError("P and N0 must be positive")

    @classmethod
    def from_ebn0(cls, T: int, ebn0_db: float, rate: float, P: float = 1.0) -> "ChannelConfig":
        N0 = P / (rate * 10.0 ** (ebn0_db / 10.0))
        return cls(T=T, P=P, N0=N0)

    def ebn0_db(self, rate: float) -> float:
        return 10.0 * np.log10(self.P / (rate * self.N0))


def make_interleavers(n: int, T: int, master_seed: int) -> np.ndarray:
    """Per-user uniform permutations of [n], seeded from (master seed, user index)."""
    out = np.empty((T, n), dtype=np.int64)
    for t in range(T):
        out[t] = np.random.default_rng([master_seed, t]).permutation(n)
    return out


def transmit(config: ChannelConfig, codewords, placements, seed=None, n_chips=None,
             rng=None):
    """BPSK-modulate, place each user's bits on chips, superimpose, add noise.

    codewords: (..., T, n) bits; placements: (T, n) chip index per (user, bit).
    Returns the received vector(s) of shape (..., n_chips).
    """
    codewords = np.asarray(codewords, dtype=np.uint8)
    placements = np.asarray(placements, dtype=np.int64)
    T, n = placements.shape
    if codewords.shape[-2:] != (T, n):
        raise ValueError(f"codewords shape {codewords.shape} incompatible with ({T}, {n})")
    if n_chips is None:
        n_chips = int(placements.max()) + 1
    squeeze = codewords.ndim == 2
    c = np.atleast_3d(codewords) if not squeeze else codewords[None]
    B = c.shape[0]
    x = np.sqrt(config.P) * (2.0 * c - 1.0)
    y = np.zeros((B, n_chips))
    for t in range(T):
        y[:, placements[t]] += x[:, t, :]
    if rng is None:
        rng = np.random.default_rng(seed)
    y += rng.normal(0.0, np.sqrt(config.N0 / 2.0), size=y.shape)
    return y[0] if squeeze else y


def _sign_patterns(k: int) -> np.ndarray:
    """All 2^k patterns in {-1,+1}^k, shape (2^k, k)."""
    if k == 0:
        return np.zeros((1, 0))
    bits = (np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1
    return 2.0 * bits - 1.0


def functional_node_update(y, priors, P: float, N0: float):
    """Message from a channel-sample node to one participating user.

    Exact log-domain marginalization over the other participants' 2^k sign
    configurations, weighting configuration signs by the prior LLRs `priors`
    and the Gaussian likelihood of the observed sample.
    """
    y = np.asarray(y, dtype=np.float64)
    priors = clamp(np.asarray(priors, dtype=np.float64))
    k = priors.shape[-1] if priors.ndim else 0
    if priors.ndim == 1 and y.ndim >= 1 and y.shape != ():
        # broadcast a single prior vector across samples
        priors = np.broadcast_to(priors, y.shape + (k,))
    S = _sign_patterns(k)
    w = priors @ ((S + 1.0) / 2.0).T  # (..., 2^k): sum of priors of +1 participants
    interf = S.sum(axis=1)
    sqP = np.sqrt(P)
    ll_plus = -((y[..., None] - sqP * (1.0 + interf)) ** 2) / N0
    ll_minus = -((y[..., None] - sqP * (-1.0 + interf)) ** 2) / N0
    m = logsumexp(w + ll_plus, axis=-1) - logsumexp(w + ll_minus, axis=-1)
    return clamp(m)


class ChipGraph:
    """Adjacency of functional (chip) nodes: which (user, bit) pairs hit each chip.

    Requires every chip to carry the same number of participants (regular
    superposition); the unspread T-user configuration is the degree-T case.
    """

    def __init__(self, placements: np.ndarray, n_chips: int | None = None):
        placements = np.asarray(placements, dtype=np.int64)
        T, n = placements.shape
        if n_chips is None:
            n_chips = int(placements.max()) + 1
        counts = np.zeros(n_chips, dtype=np.int64)
        for t in range(T):
            if len(np.unique(placements[t])) != n:
                raise ValueError(f"user {t} placement is not injective")
            np.add.at(counts, placements[t], 1)
        d = int(counts[0])
        if not (counts == d).all():
            raise ValueError("irregular chip degrees; all chips must carry the same load")
        self.T, self.n, self.n_chips, self.degree = T, n, n_chips, d
        self.placements = placements
        self.chip_user = np.empty((n_chips, d), dtype=np.int64)
        self.chip_bit = np.empty((n_chips, d), dtype=np.int64)
        fill = np.zeros(n_chips, dtype=np.int64)
        for t in range(T):
            chips = placements[t]
            self.chip_user[chips, fill[chips]] = t
            self.chip_bit[chips, fill[chips]] = np.arange(n)
            fill[chips] += 1

    def update_state_messages(self, y, m_vs, config: ChannelConfig):
        """All functional-node outputs at once.

        y: (B, n_chips); m_vs: (B, T, n) variable-to-state messages.
        Returns m_sv of shape (B, T, n).
        """
        B = y.shape[0]
        d = self.degree
        L = clamp(m_vs[:, self.chip_user, self.chip_bit])  # (B, n', d)
        S = _sign_patterns(d)  # full sign patterns including the target
        w = L @ ((S + 1.0) / 2.0).T  # (B, n', 2^d)
        interf = S.sum(axis=1)
        sqP = np.sqrt(config.P)
        A = w - ((y[..., None] - sqP * interf) ** 2) / config.N0
        out = np.empty((B, self.n_chips, d))
        for p in range(d):
            plus = S[:, p] > 0
            out[:, :, p] = (logsumexp(A[:, :, plus], axis=-1) - L[:, :, p]
                            - logsumexp(A[:, :, ~plus], axis=-1))
        m_sv = np.empty((B, self.T, self.n))
        m_sv[:, self.chip_user, self.chip_bit] = clamp(out)
        return m_sv


@dataclass
class JointResult:
    hard: np.ndarray          # (B, T, n) bit decisions
    converged: np.ndarray     # (B, T) per-user syndrome success
    outer_iters: np.ndarray   # (B,) outer iterations consumed


def joint_decode(code: LiftedCode, y, graph: ChipGraph, config: ChannelConfig,
                 outer_iters: int = 30, inner_iters: int = 2) -> JointResult:
    """Joint multi-user decoding: alternate functional-node updates with inner BP.

    Starts from all-zero variable LLRs, runs up to `outer_iters` rounds of
    (state-node update, `inner_iters` BP iterations per user), and freezes each
    frame as soon as every user's syndrome is satisfied.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    B, T, n = y.shape[0], config.T, code.n
    if graph.T != T or graph.n != n or y.shape[1] != graph.n_chips:
        raise ValueError("chip graph inconsistent with config/code/received length")

    hard_out = np.zeros((B, T, n), dtype=np.uint8)
    ok_out = np.zeros((B, T), dtype=bool)
    iters_out = np.full(B, outer_iters, dtype=np.int64)

    dec = BpDecoder(code, batch=B * T)
    dec.reset(np.zeros((B * T, n)))
    active = np.arange(B)
    y_act = y
    for o in range(outer_iters):
        Ba = len(active)
        m_vs = dec.extrinsic_sum().reshape(Ba, T, n)
        m_sv = graph.update_state_messages(y_act, m_vs, config)
        dec.set_state_llr(m_sv.reshape(Ba * T, n))
        dec.update_variables()
        dec.iterate(inner_iters)
        hard = dec.hard_decision().reshape(Ba, T, n)
        ok = code.is_codeword(hard)
        done = ok.all(axis=1)
        if done.any():
            idx = active[done]
            hard_out[idx] = hard[done]
            ok_out[idx] = ok[done]
            iters_out[idx] = o + 1
            keep = ~done
            active = active[keep]
            if len(active) == 0:
                break
            y_act = y_act[keep]
            sel = np.repeat(keep, T)
            dec.state_llr = dec.state_llr[sel]
            dec.v2c = dec.v2c[sel]
            dec.c2v = dec.c2v[sel]
            dec.batch = len(active) * T
    if len(active):
        Ba = len(active)
        hard = dec.hard_decision().reshape(Ba, T, n)
        hard_out[active] = hard
        ok_out[active] = code.is_codeword(hard)
    return JointResult(hard=hard_out, converged=ok_out, outer_iters=iters_out)
