"""Sum-product BP primitives and a batched flooding decoder for AWGN LLRs.

LLR convention throughout: positive favors bit value 1 (BPSK symbol +sqrt(P)).
"""

from __future__ import annotations

import numpy as np

from .protograph import LiftedCode

LLR_MAX = 30.0


def clamp(x):
    return np.clip(x, -LLR_MAX, LLR_MAX)


def boxplus(a, b):
    """Stable pairwise box-plus: 2*atanh(tanh(a/2)*tanh(b/2)).

    +inf acts as the identity element (used for padding).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    core = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore", over="ignore"):
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    corr = np.where(np.isfinite(a) & np.isfinite(b), corr, 0.0)
    return core + corr


def variable_update(others, state_llr):
    """Outgoing variable-to-check message: sum of the other inputs plus the state LLR."""
    others = np.asarray(others, dtype=np.float64)
    total = state_llr + (others.sum() if others.size else 0.0)
    return float(clamp(total))


def check_update(others):
    """Outgoing check-to-variable message under the even-parity constraint.

    Exact extrinsic marginalization: with d the full check degree (len(others)+1),
    m_out = 2*atanh((-1)^d * prod tanh(m_i/2)). The sign factor accounts for the
    positive-LLR-means-bit-1 convention; for even-degree checks it reduces to the
    plain tanh product rule.
    """
    others = np.asarray(others, dtype=np.float64)
    acc = np.inf
    for x in others:
        acc = boxplus(acc, x)
    sign = 1.0 if (others.size + 1) % 2 == 0 else -1.0
    return float(clamp(sign * acc))


class BpDecoder:
    """Flooding sum-product decoder over a batch of frames.

    Owns per-edge message buffers; `state_llr` is the intrinsic per-bit term
    (channel LLR for single-user decoding, the state-node message m_sv when used
    as the inner decoder of the joint GMAC decoder).
    """

    def __init__(self, code: LiftedCode, batch: int = 1):
        self.code = code
        self.batch = batch
        n, m = code.n, code.m
        edge_var = []
        check_slots = []
        for c in range(m):
            for v in code.check_neighbors[c]:
                edge_var.append(int(v))
        self.E = len(edge_var)
        self.edge_var = np.asarray(edge_var, dtype=np.int64)
        # padded (m, max_dc) edge-index table, pad slot = E
        deg_c = np.array([len(code.check_neighbors[c]) for c in range(m)], dtype=np.int64)
        self.max_dc = int(deg_c.max())
        self.check_edges = np.full((m, self.max_dc), self.E, dtype=np.int64)
        e = 0
        for c in range(m):
            for t in range(deg_c[c]):
                self.check_edges[c, t] = e
                e += 1
        # padded (n, max_dv) table
        var_lists = [[] for _ in range(n)]
        for e_idx, v in enumerate(self.edge_var):
            var_lists[v].append(e_idx)
        deg_v = np.array([len(var_lists[v]) for v in range(n)], dtype=np.int64)
        self.max_dv = int(deg_v.max())
        self.var_edges = np.full((n, self.max_dv), self.E, dtype=np.int64)
        for v in range(n):
            self.var_edges[v, :deg_v[v]] = var_lists[v]
        self.deg_c = deg_c
        self.deg_v = deg_v
        # extrinsic sign: (-1)^degree in the bit-1-positive convention
        self.check_sign = np.where(deg_c % 2 == 0, 1.0, -1.0)
        self.reset(np.zeros((batch, n)))

    def reset(self, state_llr):
        """Initialize message state from intrinsic LLRs of shape (batch, n)."""
        state_llr = np.atleast_2d(np.asarray(state_llr, dtype=np.float64))
        self.batch = state_llr.shape[0]
        self.state_llr = clamp(state_llr)
        self.v2c = np.zeros((self.batch, self.E + 1))
        self.v2c[:, :self.E] = self.state_llr[:, self.edge_var]
        self.c2v = np.zeros((self.batch, self.E + 1))

    def set_state_llr(self, state_llr):
        """Replace the intrinsic term without resetting edge messages."""
        self.state_llr = clamp(np.atleast_2d(np.asarray(state_llr, dtype=np.float64)))

    def update_checks(self):
        x = self.v2c[:, self.check_edges]  # (B, m, D)
        x = np.where(self.check_edges[None, :, :] == self.E, np.inf, x)
        B, m, D = x.shape
        prefix = np.empty((B, m, D + 1))
        suffix = np.empty((B, m, D + 1))
        prefix[:, :, 0] = np.inf
        suffix[:, :, D] = np.inf
        for t in range(D):
            prefix[:, :, t + 1] = boxplus(prefix[:, :, t], x[:, :, t])
            suffix[:, :, D - 1 - t] = boxplus(suffix[:, :, D - t], x[:, :, D - 1 - t])
        out = clamp(self.check_sign[None, :, None]
                    * boxplus(prefix[:, :, :D], suffix[:, :, 1:]))
        flat_idx = self.check_edges.ravel()
        self.c2v[:, flat_idx] = out.reshape(self.batch, -1)
        self.c2v[:, self.E] = 0.0

    def update_variables(self):
        total = self.total_llr()
        self.v2c[:, :self.E] = clamp(total[:, self.edge_var] - self.c2v[:, :self.E])

    def extrinsic_sum(self):
        """Sum of incoming check messages at each variable, shape (B, n)."""
        return self.c2v[:, self.var_edges].sum(axis=2)

    def total_llr(self):
        return self.state_llr + self.extrinsic_sum()

    def hard_decision(self):
        """Bit decisions from the total LLR; ties go to bit 1."""
        return (self.total_llr() >= 0).astype(np.uint8)

    def syndrome_ok(self, hard=None):
        if hard is None:
            hard = self.hard_decision()
        return self.code.is_codeword(hard)

    def iterate(self, count: int = 1):
        for _ in range(count):
            self.update_checks()
            self.update_variables()


def bp_decode(code: LiftedCode, channel_llr, max_iters: int = 50):
    """Standalone AWGN sum-product decoding with per-iteration syndrome early exit.

    Returns (hard decisions, converged flags, iterations used), batched over the
    leading axis of channel_llr when it is 2-D.
    """
    channel_llr = np.asarray(channel_llr, dtype=np.float64)
    squeeze = channel_llr.ndim == 1
    llr = np.atleast_2d(channel_llr)
    dec = BpDecoder(code, batch=llr.shape[0])
    dec.reset(llr)
    B = llr.shape[0]
    hard = dec.hard_decision()
    done = dec.syndrome_ok(hard)
    final = hard.copy()
    iters_used = np.zeros(B, dtype=np.int64)
    it = 0
    while it < max_iters and not done.all():
        dec.iterate(1)
        it += 1
        hard = dec.hard_decision()
        ok = dec.syndrome_ok(hard)
        newly = ok & ~done
        final[newly] = hard[newly]
        iters_used[~done] = it
        done |= ok
    final[~done] = hard[~done]
    if squeeze:
        return final[0], bool(done[0]), int(iters_used[0])
    return final, done, iters_used
