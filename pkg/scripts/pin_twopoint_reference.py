"""Compute the high-M direct reference for N(1, 0.2) at N=2, alpha=1, s=1.

Writes tests/data/twopoint_reference.json, which the test suite pins.
Usage: python3 scripts/pin_twopoint_reference.py [--M 10000000] [--seed 2024]
"""
import argparse
import json
import os
import time

from fnls.dynamics import FlowParams
from fnls.measures import MeasureSpec
from fnls.turbulence import twopoint_direct_table


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--M", type=int, default=10**7)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "data", "twopoint_reference.json"))
    args = ap.parse_args()
    spec = MeasureSpec(1.0, 2)
    params = FlowParams(1.0, "defocusing", 2, rel_tol=1e-10)
    t0 = time.perf_counter()
    ests = twopoint_direct_table([0, 1, 2], 0.2, spec, params, args.M, args.seed, args.workers)
    data = {
        "alpha": 1.0, "sign": "defocusing", "s": 1.0, "n_max": 2, "t": 0.2,
        "modes": {str(n): e.to_dict() for n, e in zip([0, 1, 2], ests)},
        "wall_time": time.perf_counter() - t0,
    }
    with open(args.out, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    for n, e in zip([0, 1, 2], ests):
        print(f"n={n}  {e.mean:.8f} ± {e.stderr:.2e}")


if __name__ == "__main__":
    main()
