"""Sweep the observation probability and record the sign of the smallest
eigenvalue of sigma-hat, next to the predicted threshold 1 - (1 - sqrt(y))^2.

    python3 scripts/pd_threshold_sweep.py --d 500 --y 0.25
"""
import argparse

import numpy as np

from misscov.core import DiagonalModel
from misscov.experiments import sample_spectrum
from misscov.limit import pd_threshold, support_edges
from misscov.simulate import SeededRng


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=500)
    ap.add_argument("--y", type=float, default=0.25)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--ps", type=float, nargs="+", default=list(np.round(np.arange(0.5, 1.0001, 0.05), 2)))
    args = ap.parse_args()

    n = int(round(args.d / args.y))
    print(f"threshold p* = {pd_threshold(args.y):.4f}")
    print("p,lower_edge,mean_lambda_min,fraction_positive_definite")
    for p in args.ps:
        model = DiagonalModel.null(args.d, n, 1.0, p)
        mins = [sample_spectrum(model, SeededRng(s)).eigenvalues[0] for s in range(args.seeds)]
        a, _ = support_edges(args.y, 1.0, p)
        print(f"{p:.2f},{a:+.4f},{np.mean(mins):+.4f},{np.mean(np.array(mins) > 0):.2f}")


if __name__ == "__main__":
    main()
