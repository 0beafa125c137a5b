"""Dyadic scans of the phase and ratio bounds, appended to CSV.

Usage: python3 scripts/lemma_scans.py [--scales 32 64 128] [--out-dir .]
"""
import argparse
import os

from fnls.lemmas import scan_phase_lower_bound, scan_ratio_bound

PHASE_ALPHAS = (0.6, 0.75, 1.0, 1.5, 2.0)
RATIO_PAIRS = ((1.0, 1.0), (0.6, 0.8), (0.75, 1.0), (1.0, 2.0))  # (s, alpha)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scales", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--out-dir", default=".")
    args = ap.parse_args()
    phase_csv = os.path.join(args.out_dir, "phase_scan.csv")
    ratio_csv = os.path.join(args.out_dir, "ratio_scan.csv")
    for scale in args.scales:
        for alpha in PHASE_ALPHAS:
            rep = scan_phase_lower_bound(alpha, scale)
            rep.append_csv(phase_csv, alpha)
            print(f"phase alpha={alpha} scale={scale}: {rep.extremal_constant:.6g} at {rep.witness}")
        for s, alpha in RATIO_PAIRS:
            rep = scan_ratio_bound(alpha, s, scale)
            rep.append_csv(ratio_csv, alpha, s)
            print(f"ratio s={s} alpha={alpha} scale={scale}: {rep.extremal_constant:.6g} at {rep.witness}")


if __name__ == "__main__":
    main()
