"""Symmetric eigenvalues, empirical spectral measures, and distances between
distributions on the real line.

The eigensolver is Householder reduction to tridiagonal form followed by the
implicit-shift QL iteration (eigenvalues only), compiled with numba.
"""
from __future__ import annotations

import math

import numba
import numpy as np
from numpy.typing import NDArray

from .core import ConvergenceError, DensityCurve, DomainError, SpectralMeasure

__all__ = [
    "tridiagonalize",
    "tridiagonal_eigenvalues",
    "symmetric_eigenvalues",
    "esd",
    "kolmogorov_distance",
    "levy_distance",
    "histogram",
]

SYMMETRY_TOL = 1e-9
LEVY_TOL = 1e-9
QL_MAX_SWEEPS = 60


@numba.njit(cache=True, nogil=True)
def _householder(a):
    n = a.shape[0]
    diag = np.empty(n)
    off = np.zeros(n)
    v = np.empty(n)
    q = np.empty(n)
    for k in range(n - 2):
        m = n - k - 1
        scale = 0.0
        for i in range(m):
            scale += abs(a[k + 1 + i, k])
        if scale == 0.0:
            off[k] = 0.0
            continue
        sigma = 0.0
        for i in range(m):
            v[i] = a[k + 1 + i, k] / scale
            sigma += v[i] * v[i]
        norm = math.sqrt(sigma)
        alpha = -norm if v[0] >= 0.0 else norm
        # v <- x - alpha e1, H = I - beta v v^T
        vnorm2 = sigma - 2.0 * alpha * v[0] + alpha * alpha
        v[0] -= alpha
        off[k] = alpha * scale
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        for i in range(m):
            acc = 0.0
            for j in range(m):
                acc += a[k + 1 + i, k + 1 + j] * v[j]
            q[i] = beta * acc
        kk = 0.0
        for i in range(m):
            kk += v[i] * q[i]
        kk *= 0.5 * beta
        for i in range(m):
            q[i] -= kk * v[i]
        for i in range(m):
            vi = v[i]
            qi = q[i]
            for j in range(m):
                a[k + 1 + i, k + 1 + j] -= vi * q[j] + qi * v[j]
    if n >= 2:
        off[n - 2] = a[n - 1, n - 2]
    for i in range(n):
        diag[i] = a[i, i]
    return diag, off


@numba.njit(cache=True, nogil=True)
def _tql(d, e, max_sweeps):
    """Implicit QL on a symmetric tridiagonal matrix; e[i] = T[i+1, i], e[n-1] = 0.

    Returns the number of the row that failed to converge, or -1.
    """
    n = d.shape[0]
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_sweeps:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def tridiagonalize(a) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Diagonal and subdiagonal of an orthogonally similar tridiagonal matrix."""
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    diag, off = _householder(a)
    return diag, off[: max(a.shape[0] - 1, 0)]


def tridiagonal_eigenvalues(diag, off) -> NDArray[np.float64]:
    d = np.array(diag, dtype=np.float64, copy=True)
    e = np.zeros(d.size)
    e[: d.size - 1] = off
    failed = _tql(d, e, QL_MAX_SWEEPS)
    if failed >= 0:
        raise ConvergenceError(
            f"QL iteration did not converge for eigenvalue {failed} after {QL_MAX_SWEEPS} sweeps",
            residual=float(np.max(np.abs(e))),
        )
    return np.sort(d)


def symmetric_eigenvalues(a) -> NDArray[np.float64]:
    """Ascending eigenvalues of a real symmetric matrix."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DomainError(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYMMETRY_TOL * (1.0 + float(np.max(np.abs(a)))):
        raise DomainError(f"matrix is not symmetric (max |A - A^T| = {asym:.3g})")
    if a.shape[0] == 1:
        return a[0].copy()
    diag, off = tridiagonalize(0.5 * (a + a.T))
    return tridiagonal_eigenvalues(diag, off)


def esd(a) -> SpectralMeasure:
    return SpectralMeasure(symmetric_eigenvalues(a))


# -- distances ---------------------------------------------------------------
# A reference law is either a SpectralMeasure (pure step cdf) or a
# DensityCurve (piecewise-linear continuous part plus atoms). Both expose a
# right-continuous cdf, its left limits, and the points where it can jump.

def _cdf_funcs(law):
    if isinstance(law, SpectralMeasure):
        return law.cdf, law.cdf_left, law.breakpoints
    if isinstance(law, DensityCurve):
        return law.cdf_at, law.cdf_left, law.breakpoints
    raise TypeError(f"expected SpectralMeasure or DensityCurve, got {type(law).__name__}")


def kolmogorov_distance(mu: SpectralMeasure, ref: DensityCurve | SpectralMeasure) -> float:
    """sup_x |F_mu(x) - F_ref(x)|, with F_ref linear between curve knots and flat
    outside the curve grid."""
    f_mu, f_mu_left, b_mu = _cdf_funcs(mu)
    f_ref, f_ref_left, b_ref = _cdf_funcs(ref)
    # between candidate points at least one cdf is constant and the other
    # monotone, so the supremum is attained at a one-sided limit of a candidate
    pts = np.union1d(b_mu, b_ref)
    right = np.abs(f_mu(pts) - f_ref(pts))
    left = np.abs(f_mu_left(pts) - f_ref_left(pts))
    return float(max(right.max(), left.max()))


def _levy_holds(eps, f_mu, f_mu_left, b_mu, f_nu, f_nu_left, b_nu) -> bool:
    slack = 1e-15
    # lower: F_mu(x - eps) - eps <= F_nu(x). The lhs steps up at b_mu + eps and
    # is constant in between while F_nu only grows, so right values at the
    # candidates suffice. F_mu is evaluated at the unshifted atoms to avoid
    # losing a jump to rounding in (b + eps) - eps.
    if np.any(f_mu(b_mu) - eps > f_nu(b_mu + eps) + slack):
        return False
    if np.any(f_mu(b_nu - eps) - eps > f_nu(b_nu) + slack):
        return False
    # upper: F_nu(x) <= F_mu(x + eps) + eps. The rhs is constant on
    # [c_k, c_{k+1}) with c = b_mu - eps, so the binding value is F_nu's left
    # limit at the next candidate.
    if np.any(f_nu_left(b_mu - eps) > f_mu_left(b_mu) + eps + slack):
        return False
    if np.any(f_nu_left(b_nu) > f_mu_left(b_nu + eps) + eps + slack):
        return False
    if np.any(f_nu(b_nu) > f_mu(b_nu + eps) + eps + slack):
        return False
    return True


def levy_distance(mu: SpectralMeasure, nu: SpectralMeasure | DensityCurve, tol: float = LEVY_TOL) -> float:
    """Smallest eps with F_mu(x-eps)-eps <= F_nu(x) <= F_mu(x+eps)+eps for all x,
    located by bisection to absolute accuracy ``tol``."""
    f_mu, f_mu_left, b_mu = _cdf_funcs(mu)
    f_nu, f_nu_left, b_nu = _cdf_funcs(nu)
    args = (f_mu, f_mu_left, b_mu, f_nu, f_nu_left, b_nu)
    if _levy_holds(0.0, *args):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _levy_holds(mid, *args):
            hi = mid
        else:
            lo = mid
    return hi


def histogram(mu: SpectralMeasure, bins: int, range: tuple[float, float] | None = None):
    """Equal-width histogram of the atoms; returns (edges, masses).

    Bins are half-open except the last, which is closed on the right.
    """
    if int(bins) != bins or bins < 1:
        raise DomainError(f"bins must be a positive integer, got {bins!r}")
    if range is None:
        lo, hi = float(mu.eigenvalues[0]), float(mu.eigenvalues[-1])
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
    else:
        lo, hi = map(float, range)
        if not hi > lo:
            raise DomainError(f"empty histogram range [{lo}, {hi}]")
    counts, edges = np.histogram(mu.eigenvalues, bins=int(bins), range=(lo, hi))
    return edges, counts / mu.d
