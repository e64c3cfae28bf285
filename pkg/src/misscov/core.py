"""Domain types shared across the package.

Everything here is immutable after construction: array fields are copied to
float64 and flagged read-only.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "MisscovError",
    "DomainError",
    "ContractError",
    "ConvergenceError",
    "SingularityError",
    "InternalError",
    "DiagonalModel",
    "ModelMatrices",
    "MaskedSample",
    "SpectralMeasure",
    "FixedPointSolution",
    "DensityCurve",
    "build_model_matrices",
]


class MisscovError(Exception):
    """Base class for all package errors."""


class DomainError(MisscovError, ValueError):
    """An input lies outside the domain of the operation."""


class ContractError(MisscovError, ValueError):
    """A precondition about how an object was produced does not hold."""


class ConvergenceError(MisscovError, RuntimeError):
    """An iterative method hit its iteration cap."""

    def __init__(self, message: str, *, residual: float = float("nan"), z: complex | None = None):
        super().__init__(message)
        self.residual = residual
        self.z = z


class SingularityError(MisscovError, ArithmeticError):
    """A resolvent denominator vanished."""


class InternalError(MisscovError, RuntimeError):
    """A mathematical guarantee was violated; indicates a bug."""


def _frozen(a, dtype=np.float64) -> NDArray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DiagonalModel:
    """Population variances ``t_diag`` and observation probabilities ``p``."""

    t_diag: NDArray[np.float64]
    p: NDArray[np.float64]
    n: int

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.t_diag, dtype=np.float64))
        p = np.atleast_1d(np.asarray(self.p, dtype=np.float64))
        if t.ndim != 1 or p.ndim != 1:
            raise DomainError("t_diag and p must be vectors")
        if p.size == 1 and t.size > 1:
            p = np.full(t.size, p[0])
        if t.size == 1 and p.size > 1:
            t = np.full(p.size, t[0])
        if t.size != p.size:
            raise DomainError(f"t_diag has {t.size} entries but p has {p.size}")
        if t.size < 1:
            raise DomainError("dimension d must be at least 1")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"sample size n must be a positive integer, got {self.n!r}")
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise DomainError("all t_diag entries must be finite and > 0")
        if not np.all(np.isfinite(p)) or np.any(p <= 0) or np.any(p > 1):
            raise DomainError("observation probabilities must lie in (0, 1]")
        object.__setattr__(self, "t_diag", _frozen(t))
        object.__setattr__(self, "p", _frozen(p))
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def null(cls, d: int, n: int, sigma2: float = 1.0, p: float = 1.0) -> "DiagonalModel":
        """T = sigma2 * I with every coordinate observed with probability p."""
        if int(d) != d or d < 1:
            raise DomainError(f"dimension d must be a positive integer, got {d!r}")
        return cls(np.full(int(d), float(sigma2)), np.full(int(d), float(p)), n)

    @property
    def d(self) -> int:
        return int(self.t_diag.size)

    @property
    def y(self) -> float:
        """Aspect ratio d/n."""
        return self.d / self.n


@dataclass(frozen=True)
class ModelMatrices:
    """Diagonals of R = T/p and S = (1-p)/p * T."""

    r_diag: NDArray[np.float64]
    s_diag: NDArray[np.float64]

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.r_diag, dtype=np.float64))
        s = np.atleast_1d(np.asarray(self.s_diag, dtype=np.float64))
        if r.shape != s.shape or r.ndim != 1 or r.size < 1:
            raise DomainError("r_diag and s_diag must be nonempty vectors of equal length")
        if np.any(r <= 0) or np.any(s < 0):
            raise DomainError("r_diag must be > 0 and s_diag >= 0")
        object.__setattr__(self, "r_diag", _frozen(r))
        object.__setattr__(self, "s_diag", _frozen(s))

    @property
    def d(self) -> int:
        return int(self.r_diag.size)

    @property
    def t_diag(self) -> NDArray[np.float64]:
        return self.r_diag - self.s_diag


def build_model_matrices(model: DiagonalModel) -> ModelMatrices:
    t, p = model.t_diag, model.p
    if np.any(p <= 0) or np.any(p > 1):
        raise DomainError("observation probabilities must lie in (0, 1]")
    return ModelMatrices(r_diag=t / p, s_diag=(1.0 - p) * t / p)


@dataclass(frozen=True)
class MaskedSample:
    """Observations ``y`` (d x n) and the binary observation mask."""

    y: NDArray[np.float64]
    mask: NDArray[np.int8]
    mean_known: bool = False

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        mask = np.asarray(self.mask)
        if y.ndim != 2:
            raise DomainError("y must be a d x n matrix")
        if mask.shape != y.shape:
            raise DomainError(f"mask shape {mask.shape} does not match y shape {y.shape}")
        if not np.all((mask == 0) | (mask == 1)):
            raise DomainError("mask entries must be 0 or 1")
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "mask", _frozen(mask, dtype=np.int8))
        object.__setattr__(self, "mean_known", bool(self.mean_known))

    @property
    def d(self) -> int:
        return int(self.y.shape[0])

    @property
    def n(self) -> int:
        return int(self.y.shape[1])


@dataclass(frozen=True)
class SpectralMeasure:
    """Uniform probability measure on a list of eigenvalues."""

    eigenvalues: NDArray[np.float64]

    def __post_init__(self):
        ev = np.sort(np.atleast_1d(np.asarray(self.eigenvalues, dtype=np.float64)))
        if ev.ndim != 1 or ev.size < 1:
            raise DomainError("a spectral measure needs at least one atom")
        if not np.all(np.isfinite(ev)):
            raise DomainError("eigenvalues must be finite")
        object.__setattr__(self, "eigenvalues", _frozen(ev))

    @property
    def d(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def weights(self) -> NDArray[np.float64]:
        return np.full(self.d, 1.0 / self.d)

    @property
    def mass(self) -> float:
        return 1.0

    @property
    def breakpoints(self) -> NDArray[np.float64]:
        return self.eigenvalues

    def cdf(self, x) -> NDArray[np.float64]:
        """mu((-inf, x])"""
        return np.searchsorted(self.eigenvalues, x, side="right") / self.d

    def cdf_left(self, x) -> NDArray[np.float64]:
        """mu((-inf, x))"""
        return np.searchsorted(self.eigenvalues, x, side="left") / self.d

    def stieltjes(self, z) -> NDArray[np.complex128]:
        z = np.asarray(z, dtype=np.complex128)
        return np.mean(1.0 / (self.eigenvalues[:, None] - z.ravel()[None, :]), axis=0).reshape(z.shape)


@dataclass(frozen=True)
class FixedPointSolution:
    z: complex
    e_circ: complex
    m_circ: complex
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class DensityCurve:
    """Sampled density with its cumulative distribution, plus optional atoms.

    ``cdf`` holds the cumulative integral of the continuous part only; point
    masses in ``atoms``/``atom_weights`` are added by :meth:`cdf_at`.
    """

    xs: NDArray[np.float64]
    density: NDArray[np.float64]
    cdf: NDArray[np.float64]
    atoms: NDArray[np.float64] = field(default_factory=lambda: np.empty(0))
    atom_weights: NDArray[np.float64] = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        xs = np.atleast_1d(np.asarray(self.xs, dtype=np.float64))
        f = np.atleast_1d(np.asarray(self.density, dtype=np.float64))
        F = np.atleast_1d(np.asarray(self.cdf, dtype=np.float64))
        atoms = np.atleast_1d(np.asarray(self.atoms, dtype=np.float64))
        w = np.atleast_1d(np.asarray(self.atom_weights, dtype=np.float64))
        if not (xs.shape == f.shape == F.shape) or xs.ndim != 1:
            raise DomainError("xs, density and cdf must be vectors of equal length")
        if xs.size > 1 and np.any(np.diff(xs) <= 0):
            raise DomainError("xs must be strictly increasing")
        if np.any(f < 0):
            raise DomainError("density must be nonnegative")
        if F.size > 1 and np.any(np.diff(F) < 0):
            raise DomainError("cdf must be nondecreasing")
        if atoms.shape != w.shape or np.any(w < 0):
            raise DomainError("atoms and atom_weights must match and weights be >= 0")
        order = np.argsort(atoms, kind="stable")
        object.__setattr__(self, "xs", _frozen(xs))
        object.__setattr__(self, "density", _frozen(f))
        object.__setattr__(self, "cdf", _frozen(F))
        object.__setattr__(self, "atoms", _frozen(atoms[order]))
        object.__setattr__(self, "atom_weights", _frozen(w[order]))

    @classmethod
    def from_density(cls, xs, density, atoms=(), atom_weights=()) -> "DensityCurve":
        """Build the cdf by cumulative trapezoid integration of ``density``."""
        xs = np.asarray(xs, dtype=np.float64)
        f = np.asarray(density, dtype=np.float64)
        F = np.concatenate(([0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(xs))))
        return cls(xs, f, F, np.asarray(atoms, dtype=np.float64), np.asarray(atom_weights, dtype=np.float64))

    @classmethod
    def point_masses(cls, atoms, weights=None) -> "DensityCurve":
        atoms = np.atleast_1d(np.asarray(atoms, dtype=np.float64))
        if weights is None:
            weights = np.full(atoms.size, 1.0 / atoms.size)
        return cls(np.empty(0), np.empty(0), np.empty(0), atoms, weights)

    @property
    def continuous_mass(self) -> float:
        return float(self.cdf[-1]) if self.cdf.size else 0.0

    @property
    def mass(self) -> float:
        return self.continuous_mass + float(self.atom_weights.sum())

    @property
    def breakpoints(self) -> NDArray[np.float64]:
        return self.atoms

    def _continuous(self, x) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=np.float64)
        if self.xs.size == 0:
            return np.zeros_like(x)
        return np.interp(x, self.xs, self.cdf, left=0.0, right=self.continuous_mass)

    def cdf_at(self, x) -> NDArray[np.float64]:
        """Total mass of (-inf, x]."""
        cum = np.concatenate(([0.0], np.cumsum(self.atom_weights)))
        return self._continuous(x) + cum[np.searchsorted(self.atoms, x, side="right")]

    def cdf_left(self, x) -> NDArray[np.float64]:
        """Total mass of (-inf, x)."""
        cum = np.concatenate(([0.0], np.cumsum(self.atom_weights)))
        return self._continuous(x) + cum[np.searchsorted(self.atoms, x, side="left")]
