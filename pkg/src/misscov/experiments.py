"""Monte Carlo harness: seeded spectra, comparisons against the limit law, and
the three-row histogram experiment (complete data, p = 1/2, split 1/4 | 3/4)."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DiagonalModel, SpectralMeasure, build_model_matrices
from .estimators import estimate_sigma_hat, estimate_t_hat
from .limit import (
    SolverConfig,
    default_grid,
    invert_to_density,
    mp_shifted_curve,
    pd_threshold,
    support_edges,
    support_from_density,
)
from .simulate import EntryDistribution, SeededRng, build_t_bar, build_z, gen_sample
from .spectral import esd, histogram, kolmogorov_distance, levy_distance

__all__ = [
    "ESTIMATORS",
    "homogeneous_params",
    "reference_law",
    "sample_spectrum",
    "compare_to_limit",
    "reduction_distance",
    "Figure1Config",
    "figure1_models",
    "run_figure1",
    "worker_count",
    "hist_support",
]

ESTIMATORS = {"t_hat": estimate_t_hat, "sigma_hat": estimate_sigma_hat}


def worker_count(default: int | None = None) -> int:
    """Worker cap from MS_THREADS, else the cpu count."""
    cap = os.environ.get("MS_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            pass
    return max(1, default or os.cpu_count() or 1)


def homogeneous_params(model: DiagonalModel):
    """(sigma2, p0) when T = sigma2 I and p is constant, else None."""
    if np.ptp(model.t_diag) == 0 and np.ptp(model.p) == 0:
        return float(model.t_diag[0]), float(model.p[0])
    return None


def reference_law(model: DiagonalModel, v: float = 1e-3, grid_points: int = 2001, cfg: SolverConfig | None = None):
    """Limit law and its support edges.

    Homogeneous models use the closed form; anything else goes through the
    fixed-point solver and Stieltjes inversion, with edges read off the
    smoothed density.
    """
    hom = homogeneous_params(model)
    if hom is not None:
        sigma2, p0 = hom
        return mp_shifted_curve(model.y, sigma2, p0), support_edges(model.y, sigma2, p0), "closed_form"
    mm = build_model_matrices(model)
    curve = invert_to_density(mm, model.y, default_grid(mm, model.y, grid_points), v, cfg)
    return curve, support_from_density(curve), "solver"


def sample_spectrum(
    model: DiagonalModel,
    seed: int | SeededRng,
    estimator: str = "sigma_hat",
    dist: EntryDistribution | None = None,
) -> SpectralMeasure:
    sample = gen_sample(model, dist, rng=seed)
    return esd(ESTIMATORS[estimator](sample))


def compare_to_limit(mu: SpectralMeasure, model: DiagonalModel, v: float = 1e-3) -> dict:
    law, (a, b), source = reference_law(model, v)
    lam_min, lam_max = float(mu.eigenvalues[0]), float(mu.eigenvalues[-1])
    report = {
        "kolmogorov": kolmogorov_distance(mu, law),
        "levy": levy_distance(mu, law),
        "lambda_min": lam_min,
        "lambda_max": lam_max,
        "edges": {"a": a, "b": b, "source": source},
        "edge_errors": {"min": lam_min - a, "max": lam_max - b},
        "y": model.y,
        "warnings": [],
    }
    if not 0 < model.y < 1:
        report["warnings"].append(
            f"y = {model.y:g} is outside (0, 1); extremal-eigenvalue limits are only established there"
        )
    return report


def reduction_distance(model: DiagonalModel, seed: int | SeededRng, dist: EntryDistribution | None = None) -> float:
    """Levy distance between the spectra of sigma-hat and the reduced matrix T-bar
    built from the same draw."""
    sample = gen_sample(model, dist, rng=seed)
    t_bar = build_t_bar(build_z(sample, model), build_model_matrices(model), model.n)
    return levy_distance(esd(estimate_sigma_hat(sample)), esd(t_bar))


@dataclass(frozen=True)
class Figure1Config:
    seed: int = 0
    scale: float = 1.0
    bins: int = 100
    sigma2: float = 1.0
    base_d: int = 2000
    base_n: int = 8000
    v: float = 1e-3
    workers: int | None = None

    @property
    def d(self) -> int:
        return max(2, int(round(self.base_d * self.scale)))

    @property
    def n(self) -> int:
        return max(1, int(round(self.base_n * self.scale)))


def figure1_models(cfg: Figure1Config) -> list[tuple[str, DiagonalModel]]:
    d, n = cfg.d, cfg.n
    half = d // 2
    split = np.concatenate((np.full(half, 0.25), np.full(d - half, 0.75)))
    t = np.full(d, cfg.sigma2)
    return [
        ("row1", DiagonalModel(t, np.ones(d), n)),
        ("row2", DiagonalModel(t, np.full(d, 0.5), n)),
        ("row3", DiagonalModel(t, split, n)),
    ]


def _figure1_row(args):
    index, (name, model), cfg = args
    sample = gen_sample(model, rng=SeededRng(cfg.seed).child(index))
    out = {}
    for est in ("sigma_hat", "t_hat"):
        mu = esd(ESTIMATORS[est](sample))
        edges, masses = histogram(mu, cfg.bins)
        out[est] = {"measure": mu, "edges": edges, "masses": masses}
    _, (a, b), source = reference_law(model, cfg.v)
    return name, model, out, (a, b, source)


def run_figure1(cfg: Figure1Config) -> dict:
    """Simulate the three rows and return histograms plus a manifest."""
    models = figure1_models(cfg)
    jobs = [(i, m, cfg) for i, m in enumerate(models)]
    workers = min(len(jobs), cfg.workers or worker_count())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_figure1_row, jobs))
    else:
        results = [_figure1_row(job) for job in jobs]

    manifest = {
        "d": cfg.d,
        "n": cfg.n,
        "y": cfg.d / cfg.n,
        "scale": cfg.scale,
        "seed": cfg.seed,
        "sigma2": cfg.sigma2,
        "bins": cfg.bins,
        "rows": {},
        "histograms": [],
    }
    hists = {}
    for name, model, out, (a, b, source) in results:
        p_desc = sorted({float(p) for p in model.p})
        manifest["rows"][name] = {
            "p_values": p_desc,
            "theory_support": [a, b],
            "support_source": source,
            "kolmogorov_t_hat_vs_sigma_hat": kolmogorov_distance(out["sigma_hat"]["measure"], out["t_hat"]["measure"]),
        }
        for est, h in out.items():
            fname = f"hist_{name}_{est}.csv"
            mu = h["measure"]
            hists[fname] = (h["edges"], h["masses"], mu)
            manifest["histograms"].append(
                {
                    "file": fname,
                    "row": name,
                    "estimator": est,
                    "lambda_min": float(mu.eigenvalues[0]),
                    "lambda_max": float(mu.eigenvalues[-1]),
                }
            )
    y = cfg.d / cfg.n
    if 0 < y < 1:
        manifest["pd_threshold"] = pd_threshold(y)
    return {"manifest": manifest, "histograms": hists}


def hist_support(edges, masses) -> tuple[float, float]:
    """Outer edges of the nonzero bins."""
    nz = np.nonzero(np.asarray(masses) > 0)[0]
    return float(edges[nz[0]]), float(edges[nz[-1] + 1])
