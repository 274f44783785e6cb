"""Monte-Carlo frame-error-rate measurement over the GMAC joint decoder."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .gmac import ChannelConfig, ChipGraph, joint_decode, make_interleavers
from .protograph import LiftedCode
from .spreading import SpreadingSignature, generate_signatures


@dataclass
class SimConfig:
    T: int
    ebn0_grid: list
    frames: int = 10_000
    stop_errors: int = 100
    outer_iters: int = 30
    inner_iters: int = 2
    seed: int = 0
    batch: int = 200
    n_prime: int | None = None  # spreading slot length; None = unspread (n' = n)
    signature_seed: int = 0

    def __post_init__(self):
        if not self.ebn0_grid:
            raise ValueError("empty Eb/N0 sweep")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")


@dataclass
class FerPoint:
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    ci_low: float
    ci_high: float
    seed: int
    seconds: float


CSV_COLUMNS = ["ebn0_db", "frames", "frame_errors", "fer", "ber",
               "ci_low", "ci_high", "seed", "seconds"]


def wilson_interval(errors: int, trials: int, z: float = 1.96):
    if trials == 0:
        return 0.0, 1.0
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def ebn0_sweep(start: float, stop: float, step: float):
    count = int(round((stop - start) / step)) + 1 if step > 0 else 1
    return [start + i * step for i in range(count)]


def run_fer_point(code: LiftedCode, cfg: SimConfig, point_idx: int, ebn0_db: float,
                  placements: np.ndarray, n_chips: int) -> FerPoint:
    rate = code.k / code.n
    config = ChannelConfig.from_ebn0(cfg.T, ebn0_db, rate)
    graph = ChipGraph(placements, n_chips=n_chips)
    sqP = np.sqrt(config.P)
    sigma = np.sqrt(config.N0 / 2.0)
    t0 = time.perf_counter()
    frames = frame_errors = bit_errors = 0
    while frames < cfg.frames and frame_errors < cfg.stop_errors:
        B = min(cfg.batch, cfg.frames - frames)
        u = np.empty((B, cfg.T, code.k), dtype=np.uint8)
        noise = np.empty((B, n_chips))
        for b in range(B):
            frame_rng = np.random.default_rng([cfg.seed, point_idx, frames + b])
            u[b] = frame_rng.integers(0, 2, size=(cfg.T, code.k))
            noise[b] = frame_rng.normal(0.0, sigma, size=n_chips)
        cw = code.encode(u)
        y = noise
        x = sqP * (2.0 * cw - 1.0)
        for t in range(cfg.T):
            y[:, placements[t]] += x[:, t, :]
        res = joint_decode(code, y, graph, config,
                           outer_iters=cfg.outer_iters, inner_iters=cfg.inner_iters)
        wrong_bits = res.hard != cw
        frame_errors += int(wrong_bits.any(axis=(1, 2)).sum())
        bit_errors += int(wrong_bits.sum())
        frames += B
    fer = frame_errors / frames
    ber = bit_errors / (frames * cfg.T * code.n)
    lo, hi = wilson_interval(frame_errors, frames)
    return FerPoint(ebn0_db=ebn0_db, frames=frames, frame_errors=frame_errors,
                    bit_errors=bit_errors, fer=fer, ber=ber, ci_low=lo, ci_high=hi,
                    seed=cfg.seed, seconds=time.perf_counter() - t0)


def run_fer_sweep(code: LiftedCode, cfg: SimConfig,
                  signature: SpreadingSignature | None = None):
    """Simulate every sweep point; returns a list of FerPoint.

    Unspread runs place users through independent interleavers; passing
    `cfg.n_prime` (or an explicit signature) switches to sparse spreading.
    """
    if signature is None and cfg.n_prime is not None:
        signature = generate_signatures(cfg.T, code.n, cfg.n_prime, cfg.signature_seed)
    if signature is not None:
        placements, n_chips = signature.assignment, signature.n_chips
    else:
        placements, n_chips = make_interleavers(code.n, cfg.T, cfg.seed), code.n
    return [run_fer_point(code, cfg, i, ebn0, placements, n_chips)
            for i, ebn0 in enumerate(cfg.ebn0_grid)]


def write_fer_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for p in points:
            writer.writerow([f"{p.ebn0_db:g}", p.frames, p.frame_errors,
                             f"{p.fer:.6g}", f"{p.ber:.6g}",
                             f"{p.ci_low:.6g}", f"{p.ci_high:.6g}",
                             p.seed, f"{p.seconds:.3f}"])


def fer_crossing(points, target_fer: float):
    """Eb/N0 where the measured FER curve crosses `target_fer` (log-linear interp).

    Returns None when the sweep does not straddle the target.
    """
    pts = sorted(points, key=lambda p: p.ebn0_db)
    for a, b in zip(pts, pts[1:]):
        if a.fer >= target_fer >= b.fer:
            if b.fer <= 0 or a.fer <= 0:
                return b.ebn0_db if a.fer >= target_fer else a.ebn0_db
            la, lb, lt = np.log(a.fer), np.log(b.fer), np.log(target_fer)
            frac = (la - lt) / (la - lb)
            return a.ebn0_db + frac * (b.ebn0_db - a.ebn0_db)
    return None
