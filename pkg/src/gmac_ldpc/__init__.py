"""LDPC-coded transmission over the T-user binary-input Gaussian MAC.

Joint multi-user belief-propagation decoding, PEXIT-chart threshold analysis,
protograph optimization, sparse spreading, and Monte-Carlo FER measurement.
"""

from .gmac import ChannelConfig, ChipGraph, functional_node_update, joint_decode, transmit
from .ldpc import LLR_MAX, BpDecoder, bp_decode, check_update, variable_update
from .optimizer import (SearchConfig, optimize_protograph, optimized_protograph_t2,
                        repetition_baseline_protograph)
from .pexit import j_func, j_inv, pexit_evolve, pexit_threshold
from .protograph import (LiftedCode, Protograph, build_repetition_baseline, lift,
                         parse_protograph)
from .spreading import SpreadingSignature, generate_signatures, joint_decode_spread
from .sim import SimConfig, run_fer_sweep

__all__ = [
    "ChannelConfig", "ChipGraph", "functional_node_update", "joint_decode", "transmit",
    "LLR_MAX", "BpDecoder", "bp_decode", "check_update", "variable_update",
    "SearchConfig", "optimize_protograph", "optimized_protograph_t2",
    "repetition_baseline_protograph",
    "j_func", "j_inv", "pexit_evolve", "pexit_threshold",
    "LiftedCode", "Protograph", "build_repetition_baseline", "lift", "parse_protograph",
    "SpreadingSignature", "generate_signatures", "joint_decode_spread",
    "SimConfig", "run_fer_sweep",
]

__version__ = "0.1.0"
