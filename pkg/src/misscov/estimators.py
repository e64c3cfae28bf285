"""Pairwise-complete covariance estimators and their normalization matrices.

For coordinates i, j the pair set is the collection of samples k where both
are observed; N_ij is its size floored at 1, so an empty pair set gives an
estimator entry of 0 rather than a division by zero.
"""
from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from .core import ContractError, DiagonalModel, DomainError, MaskedSample
from .simulate import _mirror_lower

__all__ = [
    "pair_counts",
    "row_means",
    "estimate_t_hat",
    "estimate_sigma_hat",
    "w_hat",
    "w_det",
    "hadamard_decomposition_check",
]


def _mask_float(mask) -> NDArray[np.float64]:
    mask = np.asarray(mask)
    if mask.ndim != 2 or not np.all((mask == 0) | (mask == 1)):
        raise DomainError("mask must be a binary d x n matrix")
    return mask.astype(np.float64)


def pair_counts(mask) -> NDArray[np.float64]:
    """N_ij = max(1, #{k : mask[i,k] = mask[j,k] = 1})."""
    m = _mask_float(mask)
    return np.maximum(_mirror_lower(m @ m.T), 1.0)


def row_means(sample: MaskedSample) -> NDArray[np.float64]:
    """Per-coordinate mean over observed entries (0 for a never-observed row)."""
    m = sample.mask.astype(np.float64)
    return (sample.y * m).sum(axis=1) / np.maximum(m.sum(axis=1), 1.0)


def estimate_t_hat(sample: MaskedSample) -> NDArray[np.float64]:
    m = sample.mask.astype(np.float64)
    centered = (sample.y - row_means(sample)[:, None]) * m
    return _mirror_lower(centered @ centered.T) / pair_counts(sample.mask)


def estimate_sigma_hat(sample: MaskedSample) -> NDArray[np.float64]:
    if not sample.mean_known:
        raise ContractError("sigma_hat assumes E Y = 0; sample.mean_known is False")
    ym = sample.y * sample.mask
    return _mirror_lower(ym @ ym.T) / pair_counts(sample.mask)


def w_hat(mask) -> NDArray[np.float64]:
    """Realized normalization n / N_ij."""
    mask = np.asarray(mask)
    return mask.shape[1] / pair_counts(mask)


def w_det(p, n: int | None = None) -> NDArray[np.float64]:
    """Deterministic normalization n / E#pairs: 1/(p_i p_j) off the diagonal, 1/p_i on it.

    ``n`` cancels and is accepted only for symmetry with :func:`w_hat`.
    """
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if np.any(~(p > 0)) or np.any(p > 1):
        raise DomainError("observation probabilities must lie in (0, 1]")
    w = 1.0 / np.outer(p, p)
    w[np.diag_indices_from(w)] = 1.0 / p
    return w


def hadamard_decomposition_check(sample: MaskedSample, model: DiagonalModel | None = None) -> float:
    """Max entrywise gap between T-hat and its four-term Hadamard expansion
    in W-hat, Y*eps and M-hat*eps. ``model`` is only used for a size check."""
    if model is not None and model.d != sample.d:
        raise DomainError(f"sample has d={sample.d}, model has d={model.d}")
    n = sample.n
    eps = sample.mask.astype(np.float64)
    ye = sample.y * eps
    me = row_means(sample)[:, None] * eps
    wh = w_hat(sample.mask)
    recon = (wh * (ye @ ye.T) - wh * (me @ ye.T) - wh * (ye @ me.T) + wh * (me @ me.T)) / n
    return float(np.max(np.abs(estimate_t_hat(sample) - recon)))
