"""Model spaces with known curvature-dimension data, and the bound check on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import PreconditionError
from .gapbound import DEFAULT_TOL, hat_lambda
from .models import CurvatureDimension, d_max
from .tridiag_eigen import assemble_neumann, eigenvalue_k, eigenvector_k


@dataclass(frozen=True)
class Circle:
    circumference: float

    K = 0.0
    N = 1.0

    @property
    def diameter(self) -> float:
        return self.circumference / 2

    @property
    def lambda1(self) -> float:
        return (2 * math.pi / self.circumference) ** 2


@dataclass(frozen=True)
class Sphere:
    """Round unit sphere ``S^n``; its first eigenvalue ``n`` comes from linear functions."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise PreconditionError("sphere dimension must be >= 2")

    @property
    def K(self) -> float:
        return float(self.n - 1)

    @property
    def N(self) -> float:
        return float(self.n)

    diameter = math.pi

    @property
    def lambda1(self) -> float:
        return float(self.n)


@dataclass(frozen=True)
class Rectangle:
    a: float
    b: float

    K = 0.0
    N = 2.0

    @property
    def diameter(self) -> float:
        return math.hypot(self.a, self.b)

    @property
    def lambda1(self) -> float:
        return math.pi**2 / max(self.a, self.b) ** 2


@dataclass(frozen=True)
class FlatInterval:
    d: float

    K = 0.0
    N = 1.0

    @property
    def diameter(self) -> float:
        return self.d

    @property
    def lambda1(self) -> float:
        return math.pi**2 / self.d**2

    @property
    def interval(self) -> tuple[float, float]:
        return 0.0, self.d

    def weight(self, x: float) -> float:
        return 1.0


@dataclass(frozen=True)
class WeightedInterval:
    """``[x0, x1]`` inside ``[-pi/2, pi/2]`` with measure ``cos(x)**p dx``.

    ``V = -p log cos`` has ``V'' - V'^2/p = p``, so the space is CD(p, p + 1).
    """

    x0: float
    x1: float
    p: float

    def __post_init__(self):
        if not self.p > 0:
            raise PreconditionError("weight exponent must be positive")
        if not -math.pi / 2 <= self.x0 < self.x1 <= math.pi / 2:
            raise PreconditionError("interval must lie in [-pi/2, pi/2]")

    @property
    def K(self) -> float:
        return float(self.p)

    @property
    def N(self) -> float:
        return float(self.p + 1)

    @property
    def diameter(self) -> float:
        return self.x1 - self.x0

    @property
    def interval(self) -> tuple[float, float]:
        return self.x0, self.x1

    @property
    def full_range(self) -> bool:
        return self.x0 == -math.pi / 2 and self.x1 == math.pi / 2

    def weight(self, x: float) -> float:
        return max(math.cos(x), 0.0) ** self.p


@dataclass
class EigenPair:
    lam: float
    lam_n: float
    err: float
    x: np.ndarray
    f: np.ndarray


def first_neumann_eigenpair(space, n: int = 1024) -> EigenPair:
    """Discrete first nonzero eigenpair on ``n`` cells, eigenvalue extrapolated from ``n/2``."""
    if n < 64 or n % 2:
        raise PreconditionError("n must be even and >= 64")
    x0, x1 = space.interval
    fine = assemble_neumann(space.weight, (x0, x1), n)
    coarse = assemble_neumann(space.weight, (x0, x1), n // 2)
    lam_n = eigenvalue_k(fine, 1, 1e-13)
    lam_c = eigenvalue_k(coarse, 1, 1e-13)
    f = eigenvector_k(fine, 1, lam_n)
    h = (x1 - x0) / n
    x = x0 + h * (np.arange(n) + 0.5)
    return EigenPair(lam_n + (lam_n - lam_c) / 3, lam_n, abs(lam_n - lam_c) / 3, x, f)


@dataclass
class BoundReport:
    name: str
    K: float
    N: float
    diameter: float
    lambda1: float
    lambda_hat: float
    margin: float
    err: float
    passed: bool

    def as_record(self) -> dict:
        return {
            "space": self.name,
            "K": self.K,
            "N": self.N,
            "diameter": self.diameter,
            "lambda1": self.lambda1,
            "lambda_hat": self.lambda_hat,
            "margin": self.margin,
            "pass": self.passed,
        }


def space_lambda1(space, n: int = 2048) -> tuple[float, float]:
    """``(lambda1, error estimate)``; exact for closed-form spaces."""
    if isinstance(space, WeightedInterval):
        pair = first_neumann_eigenpair(space, n)
        return pair.lam, pair.err
    return space.lambda1, 0.0


def verify_bound(space, tol: float = 1e-5, name: str = "", n: int = 2048) -> BoundReport:
    lam1, err = space_lambda1(space, n)
    hat = hat_lambda(CurvatureDimension(space.K, space.N), space.diameter, DEFAULT_TOL).lam
    margin = lam1 - hat
    return BoundReport(name or repr(space), space.K, space.N, space.diameter, lam1, hat, margin, err,
                       margin >= -(tol + err))


def s_kappa(kappa: float, theta: float) -> float:
    if theta < 0:
        raise PreconditionError("theta must be >= 0")
    if kappa > 0:
        r = math.sqrt(kappa)
        return math.sin(r * theta) / r
    if kappa == 0:
        return theta
    r = math.sqrt(-kappa)
    return math.sinh(r * theta) / r


def bg_ratio_lower_bound(cd: CurvatureDimension, r: float, R: float) -> float:
    """Bishop-Gromov lower bound for ``m(B_r)/m(B_R)``."""
    if not cd.N > 1:
        raise PreconditionError("N must be > 1")
    if not 0 < r < R:
        raise PreconditionError("need 0 < r < R")
    if R > d_max(cd) * (1 + 1e-12):
        raise PreconditionError(f"R={R} exceeds d_max={d_max(cd)}")
    kappa = cd.L
    p = cd.N - 1

    def integrand(t):
        return s_kappa(kappa, t) ** p

    opts = dict(epsabs=0.0, epsrel=1e-12, limit=200)
    num = quad(integrand, 0.0, r, **opts)[0]
    den = quad(integrand, 0.0, R, **opts)[0]
    return num / den


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    space: object
    equality: bool = False
    tags: tuple[str, ...] = field(default=())


HALF_PI = math.pi / 2

CATALOG: tuple[CatalogEntry, ...] = (
    CatalogEntry("circle-2pi", Circle(2 * math.pi), True),
    CatalogEntry("circle-1", Circle(1.0), True),
    CatalogEntry("circle-10", Circle(10.0), True),
    CatalogEntry("sphere-2", Sphere(2), True),
    CatalogEntry("sphere-3", Sphere(3), True),
    CatalogEntry("sphere-5", Sphere(5), True),
    CatalogEntry("rectangle-1x1", Rectangle(1.0, 1.0)),
    CatalogEntry("rectangle-1x2", Rectangle(1.0, 2.0)),
    CatalogEntry("rectangle-1x5", Rectangle(1.0, 5.0)),
    CatalogEntry("flat-0.5", FlatInterval(0.5), True),
    CatalogEntry("flat-1", FlatInterval(1.0), True),
    CatalogEntry("flat-pi", FlatInterval(math.pi), True),
    CatalogEntry("cos2-full", WeightedInterval(-HALF_PI, HALF_PI, 2), True, ("weighted", "symmetric", "full")),
    CatalogEntry("cos2-sym", WeightedInterval(-1.0, 1.0, 2), True, ("weighted", "symmetric")),
    CatalogEntry("cos4-sym", WeightedInterval(-HALF_PI + 0.05, HALF_PI - 0.05, 4), True,
                 ("weighted", "symmetric")),
    CatalogEntry("cos2-asym", WeightedInterval(-HALF_PI + 0.02, HALF_PI - 0.7, 2), False,
                 ("weighted", "asymmetric")),
    CatalogEntry("cos1-asym", WeightedInterval(-0.4, 1.1, 1), False, ("weighted", "asymmetric")),
    CatalogEntry("cos3-asym", WeightedInterval(-HALF_PI + 1e-3, 0.9, 3), False, ("weighted", "asymmetric")),
)


def catalog(names=None, equality_only: bool = False) -> list[CatalogEntry]:
    """Catalog entries filtered by name (substring match) and equality flag."""
    out = []
    for e in CATALOG:
        if equality_only and not e.equality:
            continue
        if names is not None and not any(s in e.name for s in names):
            continue
        out.append(e)
    return out
