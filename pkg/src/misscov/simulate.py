"""Seeded generation of data, masks, and the rescaled matrices Z and T-bar.

Randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence(seed, spawn_key=path + (stream,))``. Stream 0 feeds the entry
matrix X and stream 1 feeds the observation mask, so the two are independent
and each is reproducible on its own. ``SeededRng.child(i)`` extends the path,
which is how per-replicate / per-worker generators are derived.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .core import ContractError, DiagonalModel, DomainError, MaskedSample, ModelMatrices

__all__ = [
    "EntryDistribution",
    "SeededRng",
    "X_STREAM",
    "MASK_STREAM",
    "gen_x",
    "gen_mask",
    "gen_sample",
    "build_z",
    "build_t_bar",
]

X_STREAM = 0
MASK_STREAM = 1

_KINDS = ("gaussian", "rademacher", "uniform", "heavy_tail_t")


@dataclass(frozen=True)
class EntryDistribution:
    """Law of the iid entries of X, standardized to mean 0 and variance 1."""

    kind: str = "gaussian"
    df: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown distribution {self.kind!r}; choose from {_KINDS}")
        if self.kind == "heavy_tail_t":
            if self.df is None or not self.df > 2:
                raise DomainError("heavy_tail_t needs df > 2 for unit variance")
        elif self.df is not None:
            raise DomainError(f"df only applies to heavy_tail_t, not {self.kind}")

    @property
    def has_fourth_moment(self) -> bool:
        return self.kind != "heavy_tail_t" or self.df > 4

    def draw(self, gen: np.random.Generator, shape) -> NDArray[np.float64]:
        if self.kind == "gaussian":
            return gen.standard_normal(shape)
        if self.kind == "rademacher":
            return 2.0 * gen.integers(0, 2, size=shape).astype(np.float64) - 1.0
        if self.kind == "uniform":
            return gen.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=shape)
        df = float(self.df)
        return gen.standard_t(df, size=shape) / math.sqrt(df / (df - 2.0))


@dataclass(frozen=True)
class SeededRng:
    """Deterministic, splittable source of numpy Generators."""

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "path", tuple(int(k) for k in self.path))

    def child(self, index: int) -> "SeededRng":
        return SeededRng(self.seed, self.path + (index,))

    def stream(self, index: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path + (index,))
        return np.random.Generator(np.random.PCG64(ss))


def _as_rng(rng) -> SeededRng:
    return rng if isinstance(rng, SeededRng) else SeededRng(rng)


def gen_x(d: int, n: int, dist: EntryDistribution, rng: SeededRng | int) -> NDArray[np.float64]:
    if d < 1 or n < 1:
        raise DomainError(f"need d, n >= 1, got d={d}, n={n}")
    return dist.draw(_as_rng(rng).stream(X_STREAM), (int(d), int(n)))


def gen_mask(p, n: int, rng: SeededRng | int) -> NDArray[np.int8]:
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if np.any(~(p > 0)) or np.any(p > 1):
        raise DomainError("observation probabilities must lie in (0, 1]")
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    u = _as_rng(rng).stream(MASK_STREAM).random((p.size, int(n)))
    return (u < p[:, None]).astype(np.int8)


def gen_sample(
    model: DiagonalModel,
    dist: EntryDistribution | None = None,
    mean=None,
    rng: SeededRng | int = 0,
    *,
    assume_mean_known: bool = True,
) -> MaskedSample:
    """Draw Y = T^{1/2} X + mean together with its observation mask.

    ``mean_known`` is set only when ``mean`` is zero and the caller asserts it.
    """
    dist = dist or EntryDistribution()
    rng = _as_rng(rng)
    mean = np.zeros(model.d) if mean is None else np.atleast_1d(np.asarray(mean, dtype=np.float64))
    if mean.size == 1 and model.d > 1:
        mean = np.full(model.d, mean[0])
    if mean.shape != (model.d,):
        raise DomainError(f"mean has {mean.size} entries, model has d={model.d}")
    x = gen_x(model.d, model.n, dist, rng)
    y = np.sqrt(model.t_diag)[:, None] * x + mean[:, None]
    mask = gen_mask(model.p, model.n, rng)
    return MaskedSample(y, mask, mean_known=bool(assume_mean_known and not np.any(mean)))


def build_z(sample: MaskedSample, model: DiagonalModel) -> NDArray[np.float64]:
    """Masked observations rescaled to unit variance per observed entry and
    inflated by 1/sqrt(p): z = y * mask / sqrt(t * p)."""
    if not sample.mean_known:
        raise ContractError("Z is defined for the centered model; sample.mean_known is False")
    if sample.d != model.d:
        raise DomainError(f"sample has d={sample.d}, model has d={model.d}")
    scale = 1.0 / np.sqrt(model.t_diag * model.p)
    return sample.y * sample.mask * scale[:, None]


def build_t_bar(z: NDArray[np.float64], mm: ModelMatrices, n: int | None = None) -> NDArray[np.float64]:
    """(1/n) R^{1/2} Z Z^T R^{1/2} - S, mirrored from the lower triangle."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[0] != mm.d:
        raise DomainError(f"z must be {mm.d} x n, got shape {z.shape}")
    n = z.shape[1] if n is None else int(n)
    rz = np.sqrt(mm.r_diag)[:, None] * z
    out = (rz @ rz.T) / n
    out[np.diag_indices_from(out)] -= mm.s_diag
    return _mirror_lower(out)


def _mirror_lower(a: NDArray[np.float64]) -> NDArray[np.float64]:
    lower = np.tril(a)
    return lower + np.tril(a, -1).T
