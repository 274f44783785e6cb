"""Command-line interface: lift / simulate / pexit / optimize / spread-sim.

Each subcommand reads a JSON config (--config) with optional --seed/--out
overrides. Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import alist
from .optimizer import OptimizeResult, SearchConfig, optimize_protograph
from .pexit import NoThresholdError, pexit_threshold
from .protograph import (LiftedCode, Protograph, build_repetition_baseline, lift,
                         parse_protograph)
from .sim import SimConfig, ebn0_sweep, run_fer_sweep, write_fer_csv
from .spreading import generate_signatures


class UsageError(Exception):
    pass


CONFIG_KEYS = {
    "lift": {"protograph", "Z", "seed", "out"},
    "simulate": {"code", "T", "ebn0_start", "ebn0_stop", "ebn0_step", "frames",
                 "stop_errors", "outer_iters", "inner_iters", "seed", "batch", "out"},
    "pexit": {"protograph", "T", "estimator", "n_samples", "max_iters", "tol_db",
              "lo_db", "hi_db", "seed", "out"},
    "optimize": {"rows", "cols", "T", "max_multiplicity", "steps", "t_initial",
                 "cooling", "seed", "estimator", "n_samples", "pexit_max_iters",
                 "out", "log_out"},
    "spread-sim": {"code", "T", "n_prime", "signature_seed", "signature_out",
                   "ebn0_start", "ebn0_stop", "ebn0_step", "frames", "stop_errors",
                   "outer_iters", "inner_iters", "seed", "batch", "out"},
}

CODE_KEYS = {"protograph", "Z", "lift_seed", "alist", "baseline"}


def load_config(command: str, path: str, overrides: dict) -> dict:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    valid = CONFIG_KEYS[command]
    unknown = set(cfg) - valid
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}; "
                         f"valid keys: {sorted(valid)}")
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    return cfg


def build_code(spec, base_dir: Path) -> LiftedCode:
    if not isinstance(spec, dict):
        raise UsageError("'code' must be an object")
    unknown = set(spec) - CODE_KEYS
    if unknown:
        raise UsageError(f"unknown code keys {sorted(unknown)}; valid: {sorted(CODE_KEYS)}")
    if "alist" in spec:
        return alist.read_alist((base_dir / spec["alist"]).read_text())
    if "protograph" not in spec:
        raise UsageError("'code' needs either 'alist' or 'protograph'")
    proto = parse_protograph((base_dir / spec["protograph"]).read_text())
    code = lift(proto, int(spec.get("Z", 91)), int(spec.get("lift_seed", 1)))
    if spec.get("baseline", False):
        code = build_repetition_baseline(code)
    return code


def cmd_lift(cfg: dict) -> int:
    for key in ("protograph", "Z", "out"):
        if key not in cfg:
            raise UsageError(f"lift config requires '{key}'")
    proto = parse_protograph(Path(cfg["protograph"]).read_text())
    code = lift(proto, int(cfg["Z"]), int(cfg.get("seed", 1)))
    Path(cfg["out"]).write_text(alist.write_alist(code))
    print(f"n={code.n} m={code.m} k={code.k} -> {cfg['out']}")
    return 0


def _sim_config(cfg: dict, spread: bool) -> SimConfig:
    for key in ("code", "T", "ebn0_start", "ebn0_stop"):
        if key not in cfg:
            raise UsageError(f"config requires '{key}'")
    grid = ebn0_sweep(float(cfg["ebn0_start"]), float(cfg["ebn0_stop"]),
                      float(cfg.get("ebn0_step", 0.5)))
    return SimConfig(
        T=int(cfg["T"]), ebn0_grid=grid,
        frames=int(cfg.get("frames", 10_000)),
        stop_errors=int(cfg.get("stop_errors", 100)),
        outer_iters=int(cfg.get("outer_iters", 30)),
        inner_iters=int(cfg.get("inner_iters", 2)),
        seed=int(cfg.get("seed", 0)),
        batch=int(cfg.get("batch", 200)),
        n_prime=int(cfg["n_prime"]) if spread else None,
        signature_seed=int(cfg.get("signature_seed", 0)),
    )


def cmd_simulate(cfg: dict, spread: bool) -> int:
    if spread and "n_prime" not in cfg:
        raise UsageError("spread-sim config requires 'n_prime'")
    code = build_code(cfg["code"], Path("."))
    sim_cfg = _sim_config(cfg, spread)
    signature = None
    if spread:
        signature = generate_signatures(sim_cfg.T, code.n, sim_cfg.n_prime,
                                        sim_cfg.signature_seed)
        if "signature_out" in cfg:
            Path(cfg["signature_out"]).write_text(signature.to_json())
    points = run_fer_sweep(code, sim_cfg, signature=signature)
    out = cfg.get("out", "fer.csv")
    write_fer_csv(points, out)
    for p in points:
        print(f"ebn0_db={p.ebn0_db:g} fer={p.fer:.4g} ber={p.ber:.4g} frames={p.frames}")
    print(f"wrote {out}")
    return 0


def cmd_pexit(cfg: dict) -> int:
    for key in ("protograph", "T"):
        if key not in cfg:
            raise UsageError(f"pexit config requires '{key}'")
    proto = parse_protograph(Path(cfg["protograph"]).read_text())
    try:
        threshold, traj = pexit_threshold(
            proto, int(cfg["T"]),
            estimator=cfg.get("estimator", "mode"),
            max_iters=int(cfg.get("max_iters", 1000)),
            tol_db=float(cfg.get("tol_db", 0.01)),
            lo_db=float(cfg.get("lo_db", -2.0)),
            hi_db=float(cfg.get("hi_db", 12.0)),
            n_samples=int(cfg.get("n_samples", 10_000)),
            seed=int(cfg.get("seed", 0)))
    except NoThresholdError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    print(f"threshold_db={threshold:.4f}")
    out = cfg.get("out")
    if out:
        import csv as _csv
        with open(out, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["iteration", "min_i_app"]
                       + [f"i_es_col{j}" for j in range(proto.cols)])
            for row in traj.rows():
                w.writerow([row[0]] + [f"{v:.6g}" for v in row[1:]])
        print(f"wrote {out}")
    return 0


def cmd_optimize(cfg: dict) -> int:
    search = SearchConfig(
        rows=int(cfg.get("rows", 3)), cols=int(cfg.get("cols", 4)),
        T=int(cfg.get("T", 2)),
        max_multiplicity=int(cfg.get("max_multiplicity", 3)),
        steps=int(cfg.get("steps", 200)),
        t_initial=float(cfg.get("t_initial", 0.5)),
        cooling=float(cfg.get("cooling", 0.97)),
        seed=int(cfg.get("seed", 0)),
        estimator=cfg.get("estimator", "mode"),
        n_samples=int(cfg.get("n_samples", 10_000)),
        pexit_max_iters=int(cfg.get("pexit_max_iters", 1000)))
    result: OptimizeResult = optimize_protograph(search)
    print(f"threshold_db={result.threshold_db:.4f}")
    out = cfg.get("out")
    if out:
        Path(out).write_text(result.protograph.to_text())
        print(f"wrote {out}")
    log_out = cfg.get("log_out")
    if log_out:
        Path(log_out).write_text(json.dumps(result.log, indent=1))
        print(f"wrote {log_out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gmac-ldpc",
        description="LDPC coding over the T-user Gaussian multiple access channel")
    sub = parser.add_subparsers(dest="command")
    descriptions = {
        "lift": "lift a protograph to an alist parity-check matrix "
                "(keys: protograph, Z, seed, out)",
        "simulate": "Monte-Carlo FER sweep with joint decoding "
                    "(keys: code{protograph,Z,lift_seed,alist,baseline}, T, "
                    "ebn0_start, ebn0_stop, ebn0_step, frames, stop_errors, "
                    "outer_iters, inner_iters, seed, batch, out)",
        "pexit": "PEXIT decoding threshold for a protograph "
                 "(keys: protograph, T, estimator, n_samples, max_iters, tol_db, "
                 "lo_db, hi_db, seed, out)",
        "optimize": "simulated-annealing protograph search "
                    "(keys: rows, cols, T, max_multiplicity, steps, t_initial, "
                    "cooling, seed, estimator, n_samples, pexit_max_iters, out, log_out)",
        "spread-sim": "FER sweep with sparse spreading "
                      "(simulate keys plus n_prime, signature_seed, signature_out)",
    }
    for name, help_text in descriptions.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--out", default=None, help="override config output path")
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        cfg = load_config(args.command, args.config,
                          {"seed": args.seed, "out": args.out})
        if args.command == "lift":
            return cmd_lift(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg, spread=False)
        if args.command == "spread-sim":
            return cmd_simulate(cfg, spread=True)
        if args.command == "pexit":
            return cmd_pexit(cfg)
        if args.command == "optimize":
            return cmd_optimize(cfg)
        raise UsageError(f"unknown subcommand {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, NoThresholdError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
