"""Command-line interface.

Exit codes: 0 success, 1 runtime or convergence failure, 2 validation failure.
Any subcommand accepts ``--config file.json`` whose keys mirror the long flag
names (dashes or underscores); explicit flags override the file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    ContractError,
    DiagonalModel,
    DomainError,
    MaskedSample,
    MisscovError,
    build_model_matrices,
)
from .estimators import estimate_sigma_hat, estimate_t_hat
from .experiments import (
    Figure1Config,
    compare_to_limit,
    homogeneous_params,
    run_figure1,
)
from .io import (
    measure_from_json,
    measure_to_json,
    read_json,
    read_matrix_csv,
    write_curve_csv,
    write_histogram_csv,
    write_json,
    write_matrix_csv,
)
from .limit import (
    SolverConfig,
    default_grid,
    invert_to_density,
    mp_atom_mass,
    pd_threshold,
    support_edges,
    support_from_density,
)
from .simulate import MASK_STREAM, X_STREAM, EntryDistribution, SeededRng, gen_sample
from .spectral import esd, histogram

EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION = 0, 1, 2

_SUBPARSERS: dict[str, argparse.ArgumentParser] = {}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or comma-separated numbers, got {text!r}") from None


def _add_model_flags(p: argparse.ArgumentParser, need_d: bool = True) -> None:
    g = p.add_argument_group("model")
    g.add_argument("-d", "--dim", dest="d", type=int, help="dimension d" + ("" if need_d else " (default: from input)"))
    g.add_argument("-n", "--samples", dest="n", type=int, help="sample size n")
    g.add_argument("--y", type=float, help="aspect ratio d/n (instead of -n)")
    g.add_argument("--sigma2", type=float, default=1.0, help="common population variance (default 1)")
    g.add_argument("--t-diag", type=_floats, help="comma-separated population variances; overrides --sigma2")
    g.add_argument("--p", type=_floats, default=[1.0], help="observation probability, scalar or comma list (default 1)")


def _model_from_args(args, d: int | None = None) -> DiagonalModel:
    d = args.d if args.d is not None else d
    if args.t_diag is not None and d is None:
        d = len(args.t_diag)
    if d is None and len(args.p) > 1:
        d = len(args.p)
    if d is None:
        raise DomainError("dimension missing: pass -d")
    if args.n is not None:
        n = args.n
    elif args.y is not None:
        if not args.y > 0:
            raise DomainError(f"--y must be > 0, got {args.y}")
        n = d / args.y
        if abs(n - round(n)) > 1e-9 * n:
            raise DomainError(f"d / y = {n} is not an integer sample size")
        n = int(round(n))
    else:
        raise DomainError("sample size missing: pass -n or --y")
    t = np.asarray(args.t_diag if args.t_diag is not None else [args.sigma2], dtype=np.float64)
    p = np.asarray(args.p, dtype=np.float64)
    for name, vec in (("t-diag", t), ("p", p)):
        if vec.size not in (1, d):
            raise DomainError(f"--{name} has {vec.size} entries, expected 1 or d={d}")
    return DiagonalModel(np.broadcast_to(t, (d,)), np.broadcast_to(p, (d,)), n)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="misscov", description="Spectra of covariance estimators with missing observations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help):
        p = sub.add_parser(name, help=help)
        _SUBPARSERS[name] = p
        p.add_argument("--config", type=Path, help="JSON file with flag values")
        return p

    p = command("simulate", "draw Y and its mask; writes Y.csv, mask.csv, meta.json")
    _add_model_flags(p)
    p.add_argument("--dist", default="gaussian", choices=["gaussian", "rademacher", "uniform", "heavy_tail_t"])
    p.add_argument("--df", type=float, help="degrees of freedom for heavy_tail_t")
    p.add_argument("--mean", type=_floats, default=[0.0], help="mean vector, scalar or comma list (default 0)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("."))
    p.set_defaults(func=cmd_simulate)

    p = command("estimate", "pairwise-complete covariance from simulate output")
    p.add_argument("--input", type=Path, default=Path("."), help="directory with Y.csv, mask.csv, meta.json")
    p.add_argument("--estimator", choices=["t_hat", "sigma_hat"], default="t_hat")
    p.add_argument("--out", type=Path, help="output CSV (default: <input>/cov.csv)")
    p.set_defaults(func=cmd_estimate)

    p = command("spectrum", "eigenvalues and histogram of a symmetric matrix CSV")
    p.add_argument("cov", type=Path)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--out", type=Path, default=Path("."))
    p.set_defaults(func=cmd_spectrum)

    p = command("limit", "limiting density via Stieltjes inversion and the support edges")
    _add_model_flags(p)
    p.add_argument("--grid", type=int, default=2001, help="number of grid points")
    p.add_argument("--grid-min", type=float)
    p.add_argument("--grid-max", type=float)
    p.add_argument("--v", type=float, default=1e-3, help="inversion height")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--out", type=Path, default=Path("."))
    p.set_defaults(func=cmd_limit)

    p = command("compare", "distances between an eigenvalue file and the limit law")
    p.add_argument("eigs", type=Path)
    _add_model_flags(p, need_d=False)
    p.add_argument("--v", type=float, default=1e-3)
    p.add_argument("--out", type=Path, help="report path (default: report.json next to eigs)")
    p.set_defaults(func=cmd_compare)

    p = command("figure1", "histograms for the three missingness scenarios")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0, help="shrink d=2000, n=8000 proportionally")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--out", type=Path, default=Path("figure1"))
    p.set_defaults(func=cmd_figure1)
    return parser


# -- commands ------------------------------------------------------------------

def cmd_simulate(args) -> int:
    model = _model_from_args(args)
    dist = EntryDistribution(args.dist, args.df)
    mean = np.asarray(args.mean, dtype=np.float64)
    if mean.size not in (1, model.d):
        raise DomainError(f"--mean has {mean.size} entries, expected 1 or d={model.d}")
    mean = np.broadcast_to(mean, (model.d,))
    sample = gen_sample(model, dist, mean, SeededRng(args.seed))
    write_matrix_csv(args.out / "Y.csv", sample.y)
    write_matrix_csv(args.out / "mask.csv", sample.mask, integer=True)
    meta = {
        "version": __version__,
        "seed": args.seed,
        "streams": {"x": X_STREAM, "mask": MASK_STREAM},
        "model": {"d": model.d, "n": model.n, "t_diag": model.t_diag, "p": model.p},
        "distribution": {"kind": dist.kind, "df": dist.df},
        "mean": mean,
        "mean_known": sample.mean_known,
    }
    write_json(args.out / "meta.json", meta)
    return EXIT_OK


def load_sample(directory: Path) -> MaskedSample:
    y = read_matrix_csv(directory / "Y.csv")
    mask = read_matrix_csv(directory / "mask.csv")
    meta_path = directory / "meta.json"
    mean_known = bool(read_json(meta_path).get("mean_known", False)) if meta_path.exists() else False
    if y.shape != mask.shape:
        raise DomainError(f"Y.csv is {y.shape} but mask.csv is {mask.shape}")
    return MaskedSample(y, mask.astype(np.int8), mean_known)


def cmd_estimate(args) -> int:
    sample = load_sample(args.input)
    est = estimate_sigma_hat if args.estimator == "sigma_hat" else estimate_t_hat
    write_matrix_csv(args.out or args.input / "cov.csv", est(sample))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    mu = esd(read_matrix_csv(args.cov))
    edges, masses = histogram(mu, args.bins, tuple(args.range) if args.range else None)
    write_json(args.out / "eigs.json", measure_to_json(mu))
    write_histogram_csv(args.out / "hist.csv", edges, masses)
    return EXIT_OK


def cmd_limit(args) -> int:
    model = _model_from_args(args)
    mm = build_model_matrices(model)
    cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter)
    grid = default_grid(mm, model.y, args.grid)
    if args.grid_min is not None or args.grid_max is not None:
        lo = grid[0] if args.grid_min is None else args.grid_min
        hi = grid[-1] if args.grid_max is None else args.grid_max
        grid = np.linspace(lo, hi, args.grid)
    curve = invert_to_density(mm, model.y, grid, args.v, cfg)
    write_curve_csv(args.out / "density.csv", curve)
    edges = {"y": model.y, "v": args.v, "density_mass": curve.mass}
    hom = homogeneous_params(model)
    if hom is not None:
        sigma2, p0 = hom
        edges["a"], edges["b"] = support_edges(model.y, sigma2, p0)
        edges["source"] = "closed_form"
        edges["atom_mass"] = mp_atom_mass(model.y)
        edges["atom_location"] = -sigma2 * (1 - p0) / p0
    else:
        edges["a"], edges["b"] = support_from_density(curve)
        edges["source"] = "solver"
    if 0 < model.y < 1:
        edges["pd_threshold"] = pd_threshold(model.y)
    write_json(args.out / "edges.json", edges)
    return EXIT_OK


def cmd_compare(args) -> int:
    mu = measure_from_json(read_json(args.eigs))
    model = _model_from_args(args, d=mu.d)
    if model.d != mu.d:
        raise DomainError(f"model has d={model.d} but eigs.json has {mu.d} eigenvalues")
    report = compare_to_limit(mu, model, args.v)
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    write_json(args.out or args.eigs.with_name("report.json"), report)
    return EXIT_OK


def cmd_figure1(args) -> int:
    if not args.scale > 0:
        raise DomainError(f"--scale must be > 0, got {args.scale}")
    cfg = Figure1Config(seed=args.seed, scale=args.scale, bins=args.bins, sigma2=args.sigma2)
    result = run_figure1(cfg)
    for fname, (edges, masses, _) in result["histograms"].items():
        write_histogram_csv(args.out / fname, edges, masses)
    write_json(args.out / "manifest.json", result["manifest"])
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def _apply_config(parser, args, argv):
    """Re-parse with the config file's values installed as subcommand defaults."""
    cfg_path = getattr(args, "config", None)
    if cfg_path is None:
        return args
    try:
        cfg = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config {cfg_path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise DomainError("config file must hold a JSON object")
    sub = _SUBPARSERS[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        dest = {"dim": "d", "samples": "n"}.get(dest, dest)
        if dest not in known or dest in ("config", "help"):
            raise DomainError(f"config key {key!r} is not a flag of '{args.command}'")
        if isinstance(value, list) and known[dest].nargs is None:
            value = ",".join(map(str, value))
        # string defaults go through the flag's type converter
        defaults[dest] = value if isinstance(value, (list, bool)) or value is None else str(value)
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(parser, args, argv)
        return args.func(args)
    except (DomainError, ContractError) as exc:
        print(f"misscov {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except MisscovError as exc:
        print(f"misscov {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"misscov {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
