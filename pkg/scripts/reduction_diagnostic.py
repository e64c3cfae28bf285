"""Levy distance between the spectra of sigma-hat and the reduced matrix
n^-1 R^1/2 Z Z^T R^1/2 - S as the dimension grows with n = 4d."""
import argparse

from misscov.core import DiagonalModel
from misscov.experiments import reduction_distance
from misscov.simulate import SeededRng


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[200, 500, 1000])
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=8)
    args = ap.parse_args()

    print("d,levy")
    for d in args.dims:
        dist = reduction_distance(DiagonalModel.null(d, 4 * d, 1.0, args.p), SeededRng(args.seed))
        print(f"{d},{dist:.5f}")


if __name__ == "__main__":
    main()
