"""Protograph EXIT analysis over the T-user GMAC and decoding-threshold search."""

from __future__ import annotations

from dataclasses import dataclass, field

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator

from .gmac import ChannelConfig, functional_node_update
from .protograph import Protograph


class NoThresholdError(RuntimeError):
    """Raised when PEXIT does not converge anywhere in the search range."""


def _j_integrand(t, sigma):
    # E over y ~ N(sigma^2/2, sigma^2) of log2(1 + e^-y), standardized variable t
    y = sigma * sigma / 2.0 + sigma * t
    return np.exp(-t * t / 2.0) / np.sqrt(2.0 * np.pi) * np.log1p(np.exp(-y)) / np.log(2.0)


def _j_exact(sigma: float) -> float:
    if sigma == 0.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(_j_integrand, -40.0, 40.0, args=(sigma,), limit=200)
    return min(1.0, 1.0 - val)


class JTable:
    """Tabulated J(sigma) with monotone interpolation and bisection inverse.

    J(sigma) is the mutual information between a BPSK bit and a conditionally
    Gaussian LLR with mean sigma^2/2 and variance sigma^2.
    """

    SIGMA_MAX = 22.0

    def __init__(self, points: int = 1500):
        grid = np.concatenate([
            np.linspace(0.0, 2.0, points // 3, endpoint=False),
            np.linspace(2.0, 8.0, points // 3, endpoint=False),
            np.linspace(8.0, self.SIGMA_MAX, points - 2 * (points // 3)),
        ])
        vals = np.array([_j_exact(s) for s in grid])
        # keep a strictly increasing sub-sequence below 1 (quadrature noise can
        # make the saturated tail wiggle at the 1e-9 level)
        running = np.maximum.accumulate(vals)
        keep = (vals >= running) & (vals < 1.0)
        keep &= np.concatenate([[True], np.diff(running) > 0])
        self.sigma_grid = grid[keep]
        self.j_grid = vals[keep]
        self._interp = PchipInterpolator(self.sigma_grid, self.j_grid, extrapolate=False)

    def j(self, sigma):
        sigma = np.asarray(sigma, dtype=np.float64)
        if (sigma < 0).any():
            raise ValueError("sigma must be non-negative")
        out = np.where(sigma >= self.sigma_grid[-1], 1.0,
                       np.nan_to_num(self._interp(np.minimum(sigma, self.sigma_grid[-1]))))
        out = np.where(sigma <= 0.0, 0.0, np.clip(out, 0.0, 1.0))
        return out if out.ndim else float(out)

    def j_inv(self, mi):
        mi = np.asarray(mi, dtype=np.float64)
        if (mi < 0).any() or (mi >= 1.0).any():
            raise ValueError("mutual information must lie in [0, 1)")
        scalar = mi.ndim == 0
        target = np.atleast_1d(mi)
        lo = np.zeros_like(target)
        hi = np.full_like(target, self.sigma_grid[-1])
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.j(mid)) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        out[target <= 0.0] = 0.0
        out[target >= self.j_grid[-1]] = self.sigma_grid[-1]
        return float(out[0]) if scalar else out.reshape(np.shape(mi))

    def j_inv_sat(self, mi):
        """Inverse that saturates at the table top for MI values at or above 1."""
        mi = np.clip(np.asarray(mi, dtype=np.float64), 0.0, self.j_grid[-1])
        return self.j_inv(mi)


_TABLE: JTable | None = None


def jtable() -> JTable:
    global _TABLE
    if _TABLE is None:
        _TABLE = JTable()
    return _TABLE


def j_func(sigma):
    return jtable().j(sigma)


def j_inv(mi):
    return jtable().j_inv(mi)


@dataclass
class PexitState:
    """Per-protograph-edge mutual information matrices plus per-column state terms."""

    proto: Protograph
    I_Av: np.ndarray = field(init=False)
    I_Ev: np.ndarray = field(init=False)
    I_Es: np.ndarray = field(init=False)
    I_Evs: np.ndarray = field(init=False)
    I_APP: np.ndarray = field(init=False)
    iteration: int = 0

    def __post_init__(self):
        r, c = self.proto.rows, self.proto.cols
        self.I_Av = np.zeros((r, c))
        self.I_Ev = np.zeros((r, c))
        self.I_Es = np.zeros(c)
        self.I_Evs = np.zeros(c)
        self.I_APP = np.zeros(c)


def pexit_variable(state: PexitState) -> None:
    """Variable-node pass: update I_Ev per edge and I_Evs per column.

    A multiplicity-e base entry contributes e terms to every sum (e-1 on the
    excluded edge's own entry).
    """
    tab = jtable()
    b = state.proto.b
    sig_av = tab.j_inv_sat(state.I_Av) ** 2  # squared per-edge sigma
    col_sum = (b * sig_av).sum(axis=0)  # (cols,)
    sig_es = tab.j_inv_sat(state.I_Es) ** 2
    state.I_Evs = np.asarray(tab.j(np.sqrt(col_sum)))
    arg = np.maximum(col_sum[None, :] - sig_av + sig_es[None, :], 0.0)
    I_Ev = np.asarray(tab.j(np.sqrt(arg)))
    state.I_Ev = np.where(b > 0, I_Ev, 0.0)


def pexit_check(state: PexitState) -> None:
    """Check-node pass: I_Ac = I_Ev in, I_Ec out (written into I_Av for the next pass)."""
    tab = jtable()
    b = state.proto.b
    I_Ac = state.I_Ev
    sig = tab.j_inv_sat(1.0 - I_Ac) ** 2
    row_sum = (b * sig).sum(axis=1)  # (rows,)
    arg = np.maximum(row_sum[:, None] - sig, 0.0)
    I_Ec = 1.0 - np.asarray(tab.j(np.sqrt(arg)))
    state.I_Av = np.where(b > 0, I_Ec, 0.0)


def pexit_app(state: PexitState) -> np.ndarray:
    tab = jtable()
    b = state.proto.b
    sig_av = tab.j_inv_sat(state.I_Av) ** 2
    sig_es = tab.j_inv_sat(state.I_Es) ** 2
    state.I_APP = np.asarray(tab.j(np.sqrt((b * sig_av).sum(axis=0) + sig_es)))
    return state.I_APP


def _freedman_diaconis_mode(samples: np.ndarray) -> float:
    q75, q25 = np.percentile(samples, [75, 25])
    iqr = q75 - q25
    if iqr <= 0:
        return float(np.mean(samples))
    h = 2.0 * iqr / len(samples) ** (1.0 / 3.0)
    nbins = max(1, int(np.ceil((samples.max() - samples.min()) / h)))
    counts, edges = np.histogram(samples, bins=nbins)
    # smooth against per-bin Poisson noise before locating the peak
    if len(counts) >= 5:
        counts = np.convolve(counts, np.array([1, 4, 6, 4, 1]) / 16.0, mode="same")
    elif len(counts) >= 3:
        counts = np.convolve(counts, [0.25, 0.5, 0.25], mode="same")
    peak = int(np.argmax(counts))
    center = 0.5 * (edges[peak] + edges[peak + 1])
    if 0 < peak < len(counts) - 1:
        cm, c0, cp = counts[peak - 1], counts[peak], counts[peak + 1]
        denom = cm - 2.0 * c0 + cp
        if denom < 0:  # parabolic refinement of the peak position
            center += 0.5 * (cm - cp) / denom * (edges[1] - edges[0])
    return float(center)


def _mixture_fit(samples: np.ndarray, k: int = 2, iters: int = 100):
    """EM fit of a k-component mixture of N(mu_i, 2*mu_i) densities.

    The tied mean/variance form admits a closed-form M-step:
    mu = -1 + sqrt(1 + E[x^2]) under each component's responsibilities.
    """
    x = samples
    order = np.argsort(x)
    splits = np.array_split(x[order], k)
    mu = np.array([max(1e-3, -1.0 + np.sqrt(1.0 + np.mean(part ** 2))) for part in splits])
    a = np.full(k, 1.0 / k)
    for _ in range(iters):
        var = 2.0 * mu
        logp = (np.log(a)[None, :] - 0.5 * np.log(2 * np.pi * var)[None, :]
                - (x[:, None] - mu[None, :]) ** 2 / (2.0 * var)[None, :])
        logp -= logp.max(axis=1, keepdims=True)
        r = np.exp(logp)
        r /= r.sum(axis=1, keepdims=True)
        s0 = r.sum(axis=0)
        s2 = (r * x[:, None] ** 2).sum(axis=0)
        mask = s0 > 1e-12
        mu[mask] = np.maximum(1e-6, -1.0 + np.sqrt(1.0 + s2[mask] / s0[mask]))
        a = s0 / len(x)
    return a, mu


def estimate_state_info(I_Evs, config: ChannelConfig, estimator: str = "mode",
                        n_samples: int = 10_000, seed: int = 0,
                        num_interferers: int | None = None):
    """Monte-Carlo estimate of the state-to-variable mutual information I_Es.

    Interferer prior LLRs are drawn from the consistent Gaussian matched to
    I_Evs, the channel sample from the GMAC conditioned on the target bit being
    1, and the samples pushed through the exact functional-node update. The
    resulting LLR population is reduced to a mutual information by the chosen
    Gaussian approximation (mean-matched, mode-matched, or 2-component mixture).
    """
    tab = jtable()
    if num_interferers is None:
        num_interferers = config.T - 1
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    rng = np.random.default_rng(seed)
    I_Evs = np.atleast_1d(np.asarray(I_Evs, dtype=np.float64))
    out = np.empty_like(I_Evs)
    for jcol, mi in enumerate(I_Evs):
        mu_prior = tab.j_inv_sat(mi) ** 2 / 2.0
        signs = rng.choice([-1.0, 1.0], size=(n_samples, num_interferers))
        priors = signs * mu_prior + rng.normal(0.0, np.sqrt(2.0 * mu_prior),
                                               size=signs.shape)
        z = rng.normal(0.0, np.sqrt(config.N0 / 2.0), size=n_samples)
        y = np.sqrt(config.P) * (1.0 + signs.sum(axis=1)) + z
        samples = functional_node_update(y, priors, config.P, config.N0)
        if not np.isfinite(samples).all():
            raise ValueError("non-finite functional-node samples")
        if estimator == "mean":
            mu_es = max(0.0, float(np.mean(samples)))
            out[jcol] = tab.j(np.sqrt(2.0 * mu_es))
        elif estimator == "mode":
            mu_es = max(0.0, _freedman_diaconis_mode(samples))
            out[jcol] = tab.j(np.sqrt(2.0 * mu_es))
        elif estimator == "mixture":
            a, mu = _mixture_fit(samples)
            out[jcol] = float(np.sum(a * np.asarray(tab.j(np.sqrt(2.0 * mu)))))
        else:
            raise ValueError(f"unknown estimator {estimator!r}")
    return out


CONVERGENCE_MI = 1.0 - 1e-4


@dataclass
class PexitTrajectory:
    iterations: list
    min_app: list
    I_Es: list  # per-iteration per-column estimates

    def rows(self):
        for it, mn, ies in zip(self.iterations, self.min_app, self.I_Es):
            yield [it, mn] + list(ies)


def pexit_evolve(proto: Protograph, config: ChannelConfig, estimator: str = "mode",
                 n_samples: int = 10_000, max_iters: int = 1000, seed: int = 0,
                 stall_window: int = 30, stall_tol: float = 1e-4,
                 num_interferers: int | None = None):
    """Run the PEXIT recursion until convergence, stall, or the iteration cap.

    Returns (converged, trajectory, final state). Stall detection ends hopeless
    runs early: if the best min-I_APP seen does not improve by `stall_tol` over
    `stall_window` iterations the evolution is declared non-convergent.
    """
    state = PexitState(proto)
    traj = PexitTrajectory([], [], [])
    best = -1.0
    best_iter = 0
    for it in range(1, max_iters + 1):
        state.iteration = it
        # I_Evs from the current check-to-variable information
        pexit_variable(state)
        col_seeds = [hash((seed, it, j)) % (2 ** 32) for j in range(proto.cols)]
        state.I_Es = np.array([
            estimate_state_info(state.I_Evs[j], config, estimator, n_samples,
                                seed=col_seeds[j], num_interferers=num_interferers)[0]
            for j in range(proto.cols)])
        pexit_variable(state)  # refresh I_Ev with the new I_Es
        pexit_check(state)
        min_app = float(np.min(pexit_app(state)))
        traj.iterations.append(it)
        traj.min_app.append(min_app)
        traj.I_Es.append(state.I_Es.copy())
        if min_app >= CONVERGENCE_MI:
            return True, traj, state
        if min_app > best + stall_tol:
            best = min_app
            best_iter = it
        elif it - best_iter >= stall_window:
            return False, traj, state
    return False, traj, state


def pexit_threshold(proto: Protograph, T: int, estimator: str = "mode",
                    max_iters: int = 1000, tol_db: float = 0.01,
                    lo_db: float = -2.0, hi_db: float = 12.0,
                    n_samples: int = 10_000, seed: int = 0):
    """Smallest Eb/N0 (dB) at which the PEXIT evolution converges, by bisection.

    Returns (threshold_db, trajectory at the threshold). Raises NoThresholdError
    if even the top of the range fails to converge.
    """
    rate = proto.design_rate

    def run(ebn0_db):
        config = ChannelConfig.from_ebn0(T, ebn0_db, rate)
        return pexit_evolve(proto, config, estimator=estimator, n_samples=n_samples,
                            max_iters=max_iters, seed=seed)

    ok_hi, traj_hi, _ = run(hi_db)
    if not ok_hi:
        raise NoThresholdError(f"no threshold in range ({lo_db}, {hi_db}] dB")
    ok_lo, traj_lo, _ = run(lo_db)
    if ok_lo:
        return lo_db, traj_lo
    lo, hi, traj = lo_db, hi_db, traj_hi
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        ok, t, _ = run(mid)
        if ok:
            hi, traj = mid, t
        else:
            lo = mid
    return hi, traj
