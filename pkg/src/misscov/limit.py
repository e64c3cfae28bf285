"""Deterministic equivalent of the missing-data spectrum and its closed forms.

For diagonal R and S the resolvent traces reduce to sums over coordinates:

    e = (1/d) sum_i r_i / D_i,   m = (1/d) sum_i 1 / D_i,
    D_i = r_i / (1 + y e) - s_i - z.

Coordinates sharing the same (r_i, s_i) pair are merged into one weighted
term, which is exact and makes the homogeneous case O(1) per evaluation.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .core import (
    ConvergenceError,
    DensityCurve,
    DomainError,
    FixedPointSolution,
    InternalError,
    ModelMatrices,
    SingularityError,
)

__all__ = [
    "SolverConfig",
    "solve_e_circ",
    "m_circ",
    "mp_stieltjes",
    "mp_shifted_stieltjes",
    "mp_shifted_density",
    "mp_shifted_curve",
    "mp_atom_mass",
    "support_edges",
    "pd_threshold",
    "default_grid",
    "invert_to_density",
    "support_from_density",
]

_TINY = 1e-300


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the fixed-point iteration.

    ``newton`` switches on guarded Newton steps on e - F(e); a Newton step is
    kept only if it stays in the upper half-plane and lowers the residual,
    otherwise the (damped) Picard step is taken. Near the real axis plain
    Picard contracts very slowly, hence the default.
    """

    tol: float = 1e-12
    max_iter: int = 10_000
    damping: float = 1.0
    newton: bool = True
    stall_window: int = 50
    max_halvings: int = 6

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")
        if not 0 < self.damping <= 1:
            raise DomainError(f"damping must lie in (0, 1], got {self.damping}")


def _grouped(mm: ModelMatrices):
    pairs = np.stack([mm.r_diag, mm.s_diag], axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    return uniq[:, 0], uniq[:, 1], counts / mm.d


def _check_z(z) -> complex:
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"z must lie in the upper half-plane, got {z}")
    return z


def _check_y(y_ratio) -> float:
    y = float(y_ratio)
    if not (y >= 0 and math.isfinite(y)):
        raise DomainError(f"aspect ratio must be finite and >= 0, got {y_ratio}")
    return y


class _FixedPoint:
    """F(e) and F'(e) for one (model, y, z)."""

    def __init__(self, r, s, w, y, z):
        self.r, self.s, self.w, self.y, self.z = r, s, w, y, z

    def denominators(self, e):
        return self.r / (1.0 + self.y * e) - self.s - self.z

    def value(self, e) -> complex:
        return complex(np.sum(self.w * self.r / self.denominators(e)))

    def value_and_slope(self, e):
        den = self.denominators(e)
        f = complex(np.sum(self.w * self.r / den))
        slope = complex(np.sum(self.w * self.r**2 * self.y / den**2)) / (1.0 + self.y * e) ** 2
        return f, slope


def solve_e_circ(
    z: complex,
    mm: ModelMatrices,
    y_ratio: float,
    cfg: SolverConfig | None = None,
    e0: complex | None = None,
) -> FixedPointSolution:
    """Solve e = (1/d) tr R (R/(1 + y e) - S - z)^{-1} for e in the upper half-plane."""
    cfg = cfg or SolverConfig()
    z = _check_z(z)
    y = _check_y(y_ratio)
    r, s, w = _grouped(mm)
    fp = _FixedPoint(r, s, w, y, z)
    bound = float(mm.r_diag.max()) / z.imag
    e = 1j * float(mm.r_diag.mean()) / z.imag if e0 is None else complex(e0)
    if not e.imag > 0:
        raise DomainError(f"initial value must lie in the upper half-plane, got {e}")

    omega = cfg.damping
    halvings = 0
    best = math.inf
    since_best = 0
    f = fp.value(e)
    residual = abs(f - e)
    it = 0
    while residual > cfg.tol and it < cfg.max_iter:
        it += 1
        step = None
        if cfg.newton and y > 0:
            _, slope = fp.value_and_slope(e)
            denom = 1.0 - slope
            if abs(denom) > _TINY:
                cand = e - (e - f) / denom
                if cand.imag > 0 and abs(cand) <= 2.0 * bound:
                    f_cand = fp.value(cand)
                    if abs(f_cand - cand) < residual:
                        step = (cand, f_cand)
        if step is None:
            cand = (1.0 - omega) * e + omega * f
            step = (cand, fp.value(cand))
        e, f = step
        residual = abs(f - e)
        if residual < best:
            best, since_best = residual, 0
        else:
            since_best += 1
            if since_best >= cfg.stall_window and halvings < cfg.max_halvings:
                omega *= 0.5
                halvings += 1
                since_best = 0
    if residual <= cfg.tol:
        e = f
    else:
        raise ConvergenceError(
            f"fixed point did not converge at z={z} after {it} iterations (residual {residual:.3g})",
            residual=residual,
            z=z,
        )
    if not e.imag > 0:
        raise InternalError(f"converged e={e} at z={z} is not in the upper half-plane")
    m = m_circ(z, e, mm, y)
    return FixedPointSolution(z=z, e_circ=e, m_circ=m, residual=residual, iterations=it, converged=True)


def m_circ(z: complex, e: complex, mm: ModelMatrices, y_ratio: float) -> complex:
    """(1/d) tr (R/(1 + y e) - S - z)^{-1}."""
    z = complex(z)
    y = _check_y(y_ratio)
    r, s, w = _grouped(mm)
    den = r / (1.0 + y * complex(e)) - s - z
    if np.min(np.abs(den)) < _TINY:
        raise SingularityError(f"resolvent denominator vanished at z={z}")
    return complex(np.sum(w / den))


# -- closed forms for T = sigma2 I, p_i = p0 ---------------------------------

def _check_law(y, sigma2, p0):
    if not (y >= 0 and math.isfinite(y)):
        raise DomainError(f"y must be finite and >= 0, got {y}")
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2}")
    if not 0 < p0 <= 1:
        raise DomainError(f"p0 must lie in (0, 1], got {p0}")


def _shift(sigma2, p0) -> float:
    return sigma2 * (1.0 - p0) / p0


def mp_stieltjes(z: complex, y: float, scale: float) -> complex:
    """Stieltjes transform of the Marchenko-Pastur law with ratio y and scale
    sigma^2 = ``scale``: the root in the upper half-plane of

        z scale y s^2 + (z + scale y - scale) s + 1 = 0.
    """
    z = _check_z(z)
    if y == 0:
        return 1.0 / (scale - z)
    a = z * scale * y
    b = z + scale * y - scale
    disc = cmath.sqrt(b * b - 4.0 * a)
    roots = [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]
    # the other root is 1/(a * s); recompute the smaller one from the product
    # to avoid cancellation
    big = max(roots, key=abs)
    roots = [big, 1.0 / (a * big)]
    good = [s for s in roots if s.imag > 0]
    if not good:
        raise InternalError(f"no Marchenko-Pastur root with positive imaginary part at z={z}")
    s = max(good, key=lambda v: v.imag)
    # Newton polish on the quadratic
    for _ in range(2):
        g = (a * s + b) * s + 1.0
        dg = 2.0 * a * s + b
        if dg == 0:
            break
        s -= g / dg
    return s


def mp_shifted_stieltjes(z: complex, y: float, sigma2: float, p0: float) -> complex:
    """Stieltjes transform of MP(y, sigma2/p0) translated left by sigma2 (1-p0)/p0."""
    _check_law(y, sigma2, p0)
    z = _check_z(z)
    return mp_stieltjes(z + _shift(sigma2, p0), y, sigma2 / p0)


def support_edges(y: float, sigma2: float = 1.0, p0: float = 1.0) -> tuple[float, float]:
    """Edges of the continuous part of the limiting law."""
    _check_law(y, sigma2, p0)
    c, shift = sigma2 / p0, _shift(sigma2, p0)
    root = math.sqrt(y)
    return c * (1.0 - root) ** 2 - shift, c * (1.0 + root) ** 2 - shift


def mp_atom_mass(y: float) -> float:
    """Weight (1 - 1/y)_+ of the point mass sitting at -shift."""
    return max(0.0, 1.0 - 1.0 / y) if y > 0 else 0.0


def mp_shifted_density(x, y: float, sigma2: float = 1.0, p0: float = 1.0):
    """Density of the continuous part of MP(y, sigma2/p0) shifted by -sigma2(1-p0)/p0."""
    _check_law(y, sigma2, p0)
    if y == 0:
        raise DomainError("y = 0 gives a point mass, which has no density")
    x = np.asarray(x, dtype=np.float64)
    c, shift = sigma2 / p0, _shift(sigma2, p0)
    a, b = support_edges(y, sigma2, p0)
    u = x + shift
    inside = (x > a) & (x < b) & (u > 0)
    out = np.zeros_like(u)
    ui = u[inside]
    xi = x[inside]
    out[inside] = np.sqrt((b - xi) * (xi - a)) / (2.0 * math.pi * c * y * ui)
    return out if out.ndim else float(out)


def mp_shifted_curve(y: float, sigma2: float = 1.0, p0: float = 1.0, num: int = 4001) -> DensityCurve:
    """Closed-form law sampled on a cosine-spaced grid over its support.

    The cdf is integrated in the angle variable, x = a + (b - a)(1 - cos t)/2,
    where f(x) dx/dt stays bounded even at the inverse-square-root edge that
    appears for y = 1. A midpoint rule there is accurate to O(num^-2).
    """
    a, b = support_edges(y, sigma2, p0)
    half = 0.5 * (b - a)
    theta = np.linspace(0.0, math.pi, int(num))
    xs = a + half * (1.0 - np.cos(theta))
    xs[0], xs[-1] = a, b
    mids = 0.5 * (theta[1:] + theta[:-1])
    g = mp_shifted_density(a + half * (1.0 - np.cos(mids)), y, sigma2, p0) * half * np.sin(mids)
    cdf = np.concatenate(([0.0], np.cumsum(g * np.diff(theta))))
    f = mp_shifted_density(xs, y, sigma2, p0)
    xs, keep = np.unique(xs, return_index=True)
    atom = mp_atom_mass(y)
    atoms, weights = ([-_shift(sigma2, p0)], [atom]) if atom > 0 else ((), ())
    return DensityCurve(xs, f[keep], cdf[keep], np.asarray(atoms, dtype=np.float64), np.asarray(weights, dtype=np.float64))


def pd_threshold(y: float) -> float:
    """Observation probability above which the estimator is eventually positive definite."""
    if not 0 < y < 1:
        raise DomainError(f"threshold is defined for 0 < y < 1, got {y}")
    return 1.0 - (1.0 - math.sqrt(y)) ** 2


# -- inversion --------------------------------------------------------------

def default_grid(mm: ModelMatrices, y_ratio: float, num: int = 2001) -> NDArray[np.float64]:
    """Grid spanning the support with one unit of slack on each side.

    Homogeneous models use the exact edges; otherwise the lower end is
    -max(s) and the upper end max(r) (1 + sqrt(y))^2.
    """
    r, s = mm.r_diag, mm.s_diag
    if np.ptp(r) == 0 and np.ptp(s) == 0 and y_ratio > 0:
        p0 = float(r[0] - s[0]) / float(r[0])
        sigma2 = float(r[0] - s[0])
        lo, hi = support_edges(y_ratio, sigma2, p0)
        lo = min(lo, -float(s[0])) if y_ratio > 1 else lo
    else:
        lo = min(-float(s.max()), float((r - s).min()))
        hi = max(float(r.max()) * (1.0 + math.sqrt(y_ratio)) ** 2, float((r - s).max()))
    return np.linspace(lo - 1.0, hi + 1.0, int(num))


def invert_to_density(
    mm: ModelMatrices,
    y_ratio: float,
    grid=None,
    v: float = 1e-3,
    cfg: SolverConfig | None = None,
) -> DensityCurve:
    """Density Im m(x + iv) / pi of the deterministic equivalent, smoothed by a
    Cauchy kernel of width v, with its cumulative trapezoid cdf."""
    if not v > 0:
        raise DomainError(f"inversion height v must be > 0, got {v}")
    xs = default_grid(mm, y_ratio) if grid is None else np.asarray(grid, dtype=np.float64)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise DomainError("grid must be a strictly increasing vector with at least two points")
    dens = np.empty(xs.size)
    for j, x in enumerate(xs):
        try:
            sol = solve_e_circ(complex(x, v), mm, y_ratio, cfg)
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"inversion failed at grid point {j} (z={complex(x, v)}): {exc}",
                residual=exc.residual,
                z=complex(x, v),
            ) from exc
        dens[j] = sol.m_circ.imag / math.pi
    return DensityCurve.from_density(xs, dens)


def support_from_density(curve: DensityCurve, rel_threshold: float = 1e-2) -> tuple[float, float]:
    """Outermost grid points where the density exceeds ``rel_threshold`` times its peak."""
    f = curve.density
    idx = np.nonzero(f > rel_threshold * f.max())[0]
    return float(curve.xs[idx[0]]), float(curve.xs[idx[-1]])
