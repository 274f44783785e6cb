"""Sparse spreading signatures: T users over n' chips with uniform chip load d_c."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .gmac import ChannelConfig, ChipGraph, JointResult, joint_decode, transmit
from .protograph import LiftedCode


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class SpreadingSignature:
    """Per-user injective maps from code-bit positions to slot chips.

    assignment[t, i] is the chip carrying bit i of user t. Every chip carries
    exactly d_c = T*n/n' bits (regular spreading).
    """

    assignment: np.ndarray  # (T, n) int
    n_chips: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        object.__setattr__(self, "assignment", a)
        T, n = a.shape
        if a.min() < 0 or a.max() >= self.n_chips:
            raise SignatureError("chip index out of range")
        if (T * n) % self.n_chips != 0:
            raise SignatureError("T*n must be divisible by the chip count")
        d_c = T * n // self.n_chips
        for t in range(T):
            if len(np.unique(a[t])) != n:
                raise SignatureError(f"user {t} map is not injective")
        counts = np.bincount(a.ravel(), minlength=self.n_chips)
        if not (counts == d_c).all():
            raise SignatureError("chip load is not uniform")

    @property
    def T(self) -> int:
        return self.assignment.shape[0]

    @property
    def n(self) -> int:
        return self.assignment.shape[1]

    @property
    def chip_degree(self) -> int:
        return self.T * self.n // self.n_chips

    def to_json(self) -> str:
        return json.dumps({"n_chips": self.n_chips,
                           "assignment": self.assignment.tolist()}, indent=0)

    @classmethod
    def from_json(cls, text: str) -> "SpreadingSignature":
        obj = json.loads(text)
        return cls(assignment=np.asarray(obj["assignment"], dtype=np.int64),
                   n_chips=int(obj["n_chips"]))


def generate_signatures(T: int, n: int, n_prime: int, seed: int,
                        max_tries: int = 500) -> SpreadingSignature:
    """Random regular signature by stitching d_c chip permutations.

    Concatenating d_c permutations of the chips gives every chip multiplicity
    exactly d_c; the sequence is resampled until each user's slice of n entries
    is duplicate-free.
    """
    if n > n_prime:
        raise SignatureError("code length exceeds slot length")
    if (T * n) % n_prime != 0:
        raise SignatureError(f"T*n = {T * n} not divisible by n' = {n_prime}")
    d_c = T * n // n_prime
    if d_c < 1:
        raise SignatureError("chip degree would be zero")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        seq = np.concatenate([rng.permutation(n_prime) for _ in range(d_c)])
        assignment = seq.reshape(T, n)
        if all(len(np.unique(assignment[t])) == n for t in range(T)):
            return SpreadingSignature(assignment=assignment, n_chips=n_prime)
    raise SignatureError(f"no valid signature found in {max_tries} tries")


def spread_transmit(config: ChannelConfig, codewords, signature: SpreadingSignature,
                    seed=None, rng=None):
    return transmit(config, codewords, signature.assignment, seed=seed,
                    n_chips=signature.n_chips, rng=rng)


def joint_decode_spread(code: LiftedCode, y, signature: SpreadingSignature,
                        config: ChannelConfig, outer_iters: int = 30,
                        inner_iters: int = 2) -> JointResult:
    graph = ChipGraph(signature.assignment, n_chips=signature.n_chips)
    return joint_decode(code, y, graph, config, outer_iters=outer_iters,
                        inner_iters=inner_iters)
