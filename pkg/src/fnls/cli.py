"""Command-line front end.

Every run writes its artifacts into ``--out`` together with
``<command>_manifest.json`` (effective config, seed, wall time, version,
timestamp, artifact names).  Exit status: 0 success, 1 failed check or
module error, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import COMMANDS, ExperimentConfig, parse_config
from .density import CYLINDER_FUNCTIONALS, density_report, transport_identity_table
from .dynamics import FlowParams, hamiltonian, trajectory
from .errors import ConfigError, CutoffStarvation, DegenerateQuadruple, OverflowGuard, StepFailure
from .fourier import FourierState, sobolev_norm
from .lemmas import scan_phase_lower_bound, scan_ratio_bound, ScanReport
from .measures import MeasureSpec, partition_estimate, sample, z_score
from .rng import RandomStream
from .turbulence import DEFAULT_QUAD_STEPS, TwoPointResult, twopoint_compare

MODULE_ERRORS = (StepFailure, CutoffStarvation, OverflowGuard, DegenerateQuadruple)
DENSITY_QUAD_STEPS = 512
TRANSPORT_RADIUS = 2.0
N_CHECKPOINTS = 11

# flag -> config key; global flags live on every parser level
_KEY_FLAGS = {
    "alpha": float, "sign": str, "s": float, "n-max": int, "t": float, "r": float,
    "M": int, "rel-tol": float, "quad-steps": int, "scale": int, "sigma": float,
    "q": float, "state": str, "z-threshold": float, "density-threshold": float,
    "identity-threshold": float, "hamiltonian-threshold": float,
}


def _global_flags(parser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="JSON config file")
    parser.add_argument("--seed", type=int, default=d, help="master seed (random if omitted)")
    parser.add_argument("--workers", type=int, default=d, help="worker threads (env FNLS_WORKERS)")
    parser.add_argument("--out", default=d, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fnls", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _global_flags(p, suppress=True)
        for flag, typ in _KEY_FLAGS.items():
            p.add_argument(f"--{flag}", type=typ, default=None, dest=flag.replace("-", "_"))
    return parser


def config_from_args(argv=None) -> tuple[ExperimentConfig, int]:
    args = build_parser().parse_args(argv)
    overrides = {k.replace("-", "_"): getattr(args, k.replace("-", "_")) for k in _KEY_FLAGS}
    overrides["command"] = args.command
    overrides["seed"] = args.seed
    overrides["output_path"] = args.out
    cfg = parse_config(args.config, overrides)
    workers = args.workers
    if workers is None:
        env = os.environ.get("FNLS_WORKERS")
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ConfigError("FNLS_WORKERS", f"expected an integer, got {env!r}") from None
    workers = 1 if workers is None else workers
    if workers < 1:
        raise ConfigError("workers", "must be >= 1")
    return cfg, workers


def _params(cfg: ExperimentConfig, n_max=None) -> FlowParams:
    return FlowParams(cfg.alpha, cfg.sign, cfg.n_max if n_max is None else n_max, rel_tol=cfg.rel_tol)


def _initial_state(cfg: ExperimentConfig) -> FourierState:
    if cfg.state:
        try:
            with open(cfg.state) as fh:
                return FourierState.from_json(fh.read())
        except (OSError, ValueError, KeyError) as err:
            raise ConfigError("state", f"cannot load FourierState from {cfg.state}: {err}") from None
    return sample(MeasureSpec(cfg.s, cfg.n_max, cfg.r), RandomStream(cfg.seed, 0))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_evolve(cfg, workers, out):
    phi = _initial_state(cfg)
    traj = trajectory(phi, np.linspace(0.0, cfg.t, N_CHECKPOINTS), _params(cfg, phi.n_max))
    traj.write_csv(os.path.join(out, "evolve_trajectory.csv"))
    return True, ["evolve_trajectory.csv"]


def cmd_conserve(cfg, workers, out):
    phi = _initial_state(cfg)
    params = _params(cfg, phi.n_max)
    traj = trajectory(phi, np.linspace(0.0, cfg.t, N_CHECKPOINTS), params)
    m0, h0 = sobolev_norm(phi, 0.0), hamiltonian(phi, params)
    rows, worst_m, worst_h = [], 0.0, 0.0
    for t, st in zip(traj.times, traj.states):
        dm = abs(sobolev_norm(st, 0.0) - m0) / m0 if m0 else 0.0
        dh = abs(hamiltonian(st, params) - h0) / abs(h0) if h0 else 0.0
        worst_m, worst_h = max(worst_m, dm), max(worst_h, dh)
        rows.append([repr(float(t)), repr(dm), repr(dh)])
    _write_csv(os.path.join(out, "conserve.csv"), ["t", "l2_drift", "hamiltonian_drift"], rows)
    print(f"max L2 drift {worst_m:.3e}, max Hamiltonian drift {worst_h:.3e}")
    ok = worst_m < 100 * cfg.rel_tol and worst_h < cfg.hamiltonian_threshold
    return ok, ["conserve.csv"]


def cmd_density(cfg, workers, out):
    phi = _initial_state(cfg)
    quad = cfg.quad_steps or DENSITY_QUAD_STEPS
    rep = density_report(phi, cfg.t, _params(cfg, phi.n_max), cfg.s, quad)
    _write_json(os.path.join(out, "density_report.json"), rep.to_dict())
    print(f"log_f_norm {rep.log_f_norm:.12g}  log_f_integral {rep.log_f_integral:.12g}  discrepancy {rep.discrepancy:.3e}")
    return rep.discrepancy < cfg.density_threshold, ["density_report.json"]


def cmd_transport(cfg, workers, out):
    r = TRANSPORT_RADIUS if cfg.r is None else cfg.r
    spec = MeasureSpec(cfg.s, cfg.n_max, r)
    names = list(CYLINDER_FUNCTIONALS)
    res = transport_identity_table(
        [CYLINDER_FUNCTIONALS[k] for k in names], spec, _params(cfg), cfg.t, cfg.M, cfg.seed, workers
    )
    rows = []
    for name, (a, b, z) in zip(names, res):
        rows.append([name, repr(a.mean), repr(a.stderr), repr(b.mean), repr(b.stderr), repr(z)])
        print(f"{name:16s} pushforward {a.mean:.6f}±{a.stderr:.6f}  reweighted {b.mean:.6f}±{b.stderr:.6f}  z={z:.2f}")
    header = ["functional", "push_mean", "push_stderr", "rw_mean", "rw_stderr", "z_score"]
    _write_csv(os.path.join(out, "transport_test.csv"), header, rows)
    return all(z < cfg.z_threshold for _, _, z in res), ["transport_test.csv"]


def cmd_twopoint(cfg, workers, out):
    spec = MeasureSpec(cfg.s, cfg.n_max, cfg.r)
    quad = cfg.quad_steps or DEFAULT_QUAD_STEPS
    ns = list(range(cfg.n_max + 1))
    res = twopoint_compare(ns, cfg.t, spec, _params(cfg), cfg.M, 10 * cfg.M, cfg.seed, quad, workers)
    rows = [r.csv_row() for r in res]
    _write_csv(os.path.join(out, "twopoint.csv"), TwoPointResult.CSV_HEADER, rows)
    for r in res:
        print(f"n={r.n}  direct {r.direct.mean:.6f}±{r.direct.stderr:.6f}  reweighted {r.reweighted.mean:.6f}±{r.reweighted.stderr:.6f}  z={r.z_score:.2f}")
    return all(r.z_score < cfg.z_threshold for r in res), ["twopoint.csv"]


def cmd_lemmas(cfg, workers, out):
    phase = scan_phase_lower_bound(cfg.alpha, cfg.scale)
    ratio = scan_ratio_bound(cfg.alpha, cfg.s, cfg.scale)
    _write_csv(os.path.join(out, "lemmas_phase.csv"), ScanReport.CSV_HEADER, [phase.csv_row(cfg.alpha, "")])
    _write_csv(os.path.join(out, "lemmas_ratio.csv"), ScanReport.CSV_HEADER, [ratio.csv_row(cfg.alpha, cfg.s)])
    print(f"phase lower bound {phase.extremal_constant!r} at {phase.witness}")
    print(f"ratio bound       {ratio.extremal_constant!r} at {ratio.witness}")
    ok = phase.extremal_constant > 0 and np.isfinite(ratio.extremal_constant)
    return ok, ["lemmas_phase.csv", "lemmas_ratio.csv"]


def cmd_partition(cfg, workers, out):
    ns = [n for n in (4, 8, 16, 32, 64, 128) if n <= cfg.n_max] or [cfg.n_max]
    ests = [partition_estimate(MeasureSpec(cfg.s, n, cfg.r), cfg.q, cfg.sigma, cfg.M, cfg.seed, workers) for n in ns]
    rows = [[n, repr(e.mean), repr(e.stderr), e.n_samples, e.seed] for n, e in zip(ns, ests)]
    _write_csv(os.path.join(out, "partition.csv"), ["n_max", "mean", "stderr", "n_samples", "seed"], rows)
    for n, e in zip(ns, ests):
        print(f"N={n:4d}  {e.mean:.6g} ± {e.stderr:.3g}")
    ok = not upward_trend(ests, cfg.z_threshold)
    return ok, ["partition.csv"]


def upward_trend(ests, z: float) -> bool:
    """True if some later estimate exceeds an earlier one by more than ``z`` combined stderr."""
    for i, a in enumerate(ests):
        for b in ests[i + 1 :]:
            if b.mean > a.mean and z_score(a, b) > z:
                return True
    return False


DISPATCH = {
    "evolve": cmd_evolve,
    "density": cmd_density,
    "transport-test": cmd_transport,
    "twopoint": cmd_twopoint,
    "lemmas": cmd_lemmas,
    "partition": cmd_partition,
    "conserve": cmd_conserve,
}


def run(cfg: ExperimentConfig, workers: int = 1) -> int:
    cfg = cfg.with_seed()
    print(f"seed: {cfg.seed}")
    out = cfg.output_path
    os.makedirs(out, exist_ok=True)
    start = time.perf_counter()
    try:
        ok, artifacts = DISPATCH[cfg.command](cfg, workers, out)
    except MODULE_ERRORS as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    manifest = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "wall_time": time.perf_counter() - start,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "artifacts": artifacts,
        "workers": workers,
        "passed": bool(ok),
    }
    _write_json(os.path.join(out, f"{cfg.command}_manifest.json"), manifest)
    if not ok:
        print("check failed", file=sys.stderr)
    return 0 if ok else 1


def main(argv=None) -> int:
    try:
        cfg, workers = config_from_args(argv)
        return run(cfg, workers)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
