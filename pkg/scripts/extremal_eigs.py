"""Extreme eigenvalues of sigma-hat against the shifted support edges, over
a range of dimensions at fixed aspect ratio.

    python3 scripts/extremal_eigs.py --y 0.25 --p 0.5 --dims 250 500 1000
"""
import argparse

from misscov.core import DiagonalModel
from misscov.experiments import sample_spectrum
from misscov.limit import support_edges
from misscov.simulate import SeededRng


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--y", type=float, default=0.25)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--sigma2", type=float, default=1.0)
    ap.add_argument("--dims", type=int, nargs="+", default=[250, 500, 1000])
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()

    a, b = support_edges(args.y, args.sigma2, args.p)
    print(f"edges a={a:.4f} b={b:.4f}")
    print("d,seed,lambda_min,lambda_max,err_min,err_max")
    for d in args.dims:
        model = DiagonalModel.null(d, int(round(d / args.y)), args.sigma2, args.p)
        for seed in range(args.seeds):
            ev = sample_spectrum(model, SeededRng(seed).child(d)).eigenvalues
            print(f"{d},{seed},{ev[0]:.5f},{ev[-1]:.5f},{ev[0] - a:+.5f},{ev[-1] - b:+.5f}")


if __name__ == "__main__":
    main()
