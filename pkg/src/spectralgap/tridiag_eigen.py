"""Symmetric-definite tridiagonal pencils ``(S, M)`` with diagonal ``M``.

Eigenvalues are found by bisection on Sturm inertia counts, eigenvectors by
inverse iteration.  The pencils come from a conservative finite-volume
discretization of ``-(rho v')' = lam rho v`` with natural Neumann ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .errors import PreconditionError, SpectralGapError


@dataclass(frozen=True)
class TridiagonalPencil:
    stiff_diag: np.ndarray
    stiff_off: np.ndarray
    mass_diag: np.ndarray

    def __post_init__(self):
        n = len(self.stiff_diag)
        if n < 2:
            raise PreconditionError("pencil must have n >= 2")
        if len(self.stiff_off) != n - 1 or len(self.mass_diag) != n:
            raise PreconditionError("inconsistent pencil array lengths")
        m = self.mass_diag
        if np.any(m < 0) or np.any(m[1:-1] <= 0):
            raise PreconditionError("mass entries must be positive (boundary entries nonnegative)")

    @property
    def n(self) -> int:
        return len(self.stiff_diag)

    def apply_stiffness(self, x: np.ndarray) -> np.ndarray:
        y = self.stiff_diag * x
        y[:-1] += self.stiff_off * x[1:]
        y[1:] += self.stiff_off * x[:-1]
        return y

    def stiffness_norm(self) -> float:
        """Infinity norm of the stiffness matrix."""
        a = np.abs(self.stiff_diag).copy()
        b = np.abs(self.stiff_off)
        a[:-1] += b
        a[1:] += b
        return float(a.max())


def assemble_neumann(weight: Callable[[float], float], interval: tuple[float, float], n: int) -> TridiagonalPencil:
    """Cell-centered finite volumes on ``n`` uniform cells.

    Interior faces carry ``rho`` at the face, boundary faces are dropped (zero
    flux), and the mass is ``rho`` at the cell center.
    """
    if n < 2:
        raise PreconditionError("n must be >= 2")
    x0, x1 = map(float, interval)
    if not x1 > x0:
        raise PreconditionError("interval must have x1 > x0")
    h = (x1 - x0) / n
    faces = x0 + h * np.arange(1, n)
    centers = x0 + h * (np.arange(n) + 0.5)
    rf = np.array([weight(x) for x in faces], dtype=float)
    rc = np.array([weight(x) for x in centers], dtype=float)
    if np.any(rf < 0) or np.any(rc < 0):
        raise PreconditionError("weight is negative at an evaluation point")
    flux = rf / (h * h)
    diag = np.zeros(n)
    diag[:-1] += flux
    diag[1:] += flux
    return TridiagonalPencil(diag, -flux, rc)


def _pivots_negative(a, b2, m, sigma):
    """Negative-pivot count of LDL^T(S - sigma M); None on exact breakdown."""
    count = 0
    d = a[0] - sigma * m[0]
    if d == 0.0:
        return None
    if d < 0.0:
        count += 1
    for i in range(1, len(a)):
        d = a[i] - sigma * m[i] - b2[i - 1] / d
        if d == 0.0:
            return None
        if d < 0.0:
            count += 1
    return count


class _Sturm:
    """Cached Python lists for the inner inertia loop."""

    def __init__(self, pencil: TridiagonalPencil):
        self.a = pencil.stiff_diag.tolist()
        self.b2 = (pencil.stiff_off**2).tolist()
        self.m = pencil.mass_diag.tolist()

    def count(self, sigma: float) -> tuple[int, int]:
        perturb = 0
        s = sigma
        while True:
            c = _pivots_negative(self.a, self.b2, self.m, s)
            if c is not None:
                return c, perturb
            perturb += 1
            step = 2.0**perturb * math.ulp(max(abs(sigma), 1e-300))
            s = sigma + step if perturb % 2 else sigma - step


def inertia_detail(pencil: TridiagonalPencil, sigma: float) -> tuple[int, int]:
    """``(count, perturbations)``: eigenvalues below ``sigma`` and breakdown restarts."""
    return _Sturm(pencil).count(sigma)


def inertia(pencil: TridiagonalPencil, sigma: float) -> int:
    """Number of pencil eigenvalues strictly below ``sigma``."""
    return inertia_detail(pencil, sigma)[0]


def gershgorin_bounds(pencil: TridiagonalPencil) -> tuple[float, float]:
    """Enclosure of the spectrum of ``M^{-1/2} S M^{-1/2}``."""
    m = pencil.mass_diag
    if np.any(m <= 0):
        raise PreconditionError("Gershgorin bounds need a strictly positive mass")
    a = pencil.stiff_diag / m
    r = np.abs(pencil.stiff_off) / np.sqrt(m[:-1] * m[1:])
    rad = np.zeros(pencil.n)
    rad[:-1] += r
    rad[1:] += r
    return float(np.min(a - rad)), float(np.max(a + rad))


def eigenvalue_k(pencil: TridiagonalPencil, k: int, tol: float = 1e-12) -> float:
    """k-th smallest generalized eigenvalue (0-based) by inertia bisection."""
    n = pencil.n
    if not 0 <= k < n:
        raise PreconditionError(f"k={k} out of range for n={n}")
    lo, hi = gershgorin_bounds(pencil)
    pad = 1e-12 * max(1.0, abs(lo), abs(hi))
    lo, hi = lo - pad - tol, hi + pad + tol
    sturm = _Sturm(pencil)
    floor = max(tol, 1e-300)
    while hi - lo > tol:
        base = max(lo, floor)
        if hi > 4.0 * base:
            # geometric split while the bracket spans orders of magnitude
            mid = math.sqrt(base * hi)
        else:
            mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if sturm.count(mid)[0] <= k:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _normalize_min(v: np.ndarray) -> np.ndarray:
    vmin, vmax = v.min(), v.max()
    if abs(vmax + vmin) <= 1e-8 * max(abs(vmax), abs(vmin)):
        if v[0] > 0:
            v = -v
    elif vmax > -vmin:
        v = -v
    vmin = v.min()
    if vmin < 0:
        return v / -vmin
    # constant-sign vector (k = 0): scale to -1
    return -v / np.abs(v).max()


def eigenvector_k(pencil: TridiagonalPencil, k: int, lambda_k: float, max_iter: int = 20) -> np.ndarray:
    """Eigenvector for ``lambda_k`` by inverse iteration, normalized to ``min = -1``.

    Sign convention: the extreme of largest magnitude is the minimum (so ``max <= 1``);
    ties are broken by making the first entry negative.
    """
    n = pencil.n
    if not 0 <= k < n:
        raise PreconditionError(f"k={k} out of range for n={n}")
    m = pencil.mass_diag
    snorm = pencil.stiffness_norm()
    shift = lambda_k + 1e-13 * max(1.0, abs(lambda_k))
    ab = np.zeros((3, n))
    ab[0, 1:] = pencil.stiff_off
    ab[1] = pencil.stiff_diag - shift * m
    ab[2, :-1] = pencil.stiff_off
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    for _ in range(max_iter):
        y = solve_banded((1, 1), ab, m * x)
        nrm = np.linalg.norm(y)
        if not np.isfinite(nrm) or nrm == 0:
            raise SpectralGapError("inverse iteration broke down")
        x = y / nrm
        res = pencil.apply_stiffness(x) - lambda_k * m * x
        if np.linalg.norm(res) <= 1e-8 * snorm * np.linalg.norm(x):
            return _normalize_min(x)
    raise SpectralGapError(f"inverse iteration did not converge in {max_iter} iterations")
