"""Discrepancy between the two density formulas as quad_steps grows.

Shows where the time-integral form needs more nodes than a fixed grid
offers (fast phases at large N and alpha).
Usage: python3 scripts/density_convergence.py [--alpha 2] [--ns 4 8 16] [--t 0.4]
"""
import argparse

from fnls.density import log_density_integral, log_density_norm
from fnls.dynamics import FlowParams
from fnls.measures import MeasureSpec, sample
from fnls.rng import RandomStream


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--s", type=float, default=0.8)
    ap.add_argument("--t", type=float, default=0.4)
    ap.add_argument("--ns", type=int, nargs="+", default=[4, 8, 16])
    ap.add_argument("--steps", type=int, nargs="+", default=[128, 512, 2048, 8192, 32768])
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    print("n_max," + ",".join(f"q{q}" for q in args.steps))
    for N in args.ns:
        p = FlowParams(args.alpha, "defocusing", N)
        x = sample(MeasureSpec(args.s, N), RandomStream(args.seed, N))
        ref = log_density_norm(x, args.t, p, args.s)
        errs = [abs(log_density_integral(x, args.t, p, args.s, q) - ref) for q in args.steps]
        print(f"{N}," + ",".join(f"{e:.3e}" for e in errs))


if __name__ == "__main__":
    main()
