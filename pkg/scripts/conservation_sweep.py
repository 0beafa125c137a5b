"""L2 and Hamiltonian drift over unit time for a grid of (alpha, N, sign).

Usage: python3 scripts/conservation_sweep.py [--out drift.csv] [--seed 1]
"""
import argparse
import csv
import itertools

import numpy as np

from fnls.dynamics import FlowParams, hamiltonian, trajectory
from fnls.fourier import sobolev_norm
from fnls.measures import MeasureSpec, sample
from fnls.rng import RandomStream


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="drift.csv")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.6, 1.0, 1.5, 2.0])
    ap.add_argument("--ns", type=int, nargs="+", default=[8, 32])
    ap.add_argument("--rel-tol", type=float, default=1e-10)
    args = ap.parse_args()
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "n_max", "sign", "l2_drift", "hamiltonian_drift", "n_steps"])
        for k, (alpha, N, sign) in enumerate(itertools.product(args.alphas, args.ns, ("focusing", "defocusing"))):
            p = FlowParams(alpha, sign, N, rel_tol=args.rel_tol)
            x = sample(MeasureSpec(1.0, N), RandomStream(args.seed, k))
            tr = trajectory(x, np.linspace(0, 1, 11), p)
            m0, h0 = sobolev_norm(x, 0), hamiltonian(x, p)
            dm = max(abs(sobolev_norm(s, 0) - m0) / m0 for s in tr.states)
            dh = max(abs(hamiltonian(s, p) - h0) / abs(h0) for s in tr.states)
            w.writerow([alpha, N, sign, repr(dm), repr(dh), tr.stats["n_steps"]])
            print(f"alpha={alpha} N={N} {sign:10s} L2 {dm:.2e}  H {dh:.2e}")


if __name__ == "__main__":
    main()
