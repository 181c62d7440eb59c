"""One-dimensional model families.

Every model here is an eigenvalue ODE of the form

    v'' - c(x) v' = -lam v,      c = -rho'/rho,

so that ``(rho v')' = -lam rho v`` is its self-adjoint form.  ``c`` is called the
*drift* throughout the package.  Two families are provided:

* :class:`SymmetricModel` -- the Neumann problem on ``(-d/2, d/2)`` whose first
  nonzero eigenvalue is the gap bound ``hat_lambda(K, N, d)``.
* :class:`OneSidedModel` -- the half-line / half-sphere models ``(R, l)`` started at
  a point ``a`` where the density vanishes.

Where the density vanishes like ``dist**p`` the drift has a ``p/dist`` pole and the
IVP is started from a power series (:func:`frobenius_start`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError

# relative slack used when classifying d == d_max
_DMAX_RTOL = 1e-12


@dataclass(frozen=True)
class CurvatureDimension:
    """Lower Ricci bound ``K`` and upper dimension bound ``N``."""

    K: float
    N: float

    def __post_init__(self):
        if not (math.isfinite(self.K) and math.isfinite(self.N)):
            raise DomainError(f"K and N must be finite, got K={self.K}, N={self.N}")
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if self.K > 0 and self.N == 1:
            raise DomainError("K > 0 with N = 1 is not admissible (the model drift degenerates)")

    @property
    def L(self) -> float:
        """Normalized curvature K/(N-1); undefined for N = 1."""
        if self.N == 1:
            raise DomainError("L = K/(N-1) is undefined for N = 1")
        return self.K / (self.N - 1)


def d_max(cd: CurvatureDimension) -> float:
    """Largest admissible diameter, ``pi*sqrt((N-1)/K)`` for K > 0; ``inf`` otherwise."""
    if cd.K > 0 and cd.N > 1:
        return math.pi * math.sqrt((cd.N - 1) / cd.K)
    return math.inf


def drift_T(cd: CurvatureDimension, x: float) -> float:
    """The function T(x) of the symmetric model ``v'' - (N-1) T v' = -lam v``.

    For K < 0 this is ``-sqrt(-L) tanh(sqrt(-L) x)``, the continuation of the K > 0
    branch that makes ``cosh**(N-1)`` the density.
    """
    L = cd.L
    if L > 0:
        r = math.sqrt(L)
        if abs(r * x) >= math.pi / 2:
            raise DomainError(f"x={x} at or beyond the tan singularity {math.pi / (2 * r)}")
        return r * math.tan(r * x)
    if L == 0:
        return 0.0
    r = math.sqrt(-L)
    return -r * math.tanh(r * x)


def weight_rho(cd: CurvatureDimension, x: float) -> float:
    """Density of the symmetric model; ``rho'/rho = -(N-1) T``."""
    if cd.N == 1:
        return 1.0
    L = cd.L
    p = cd.N - 1
    if L > 0:
        r = math.sqrt(L)
        if abs(r * x) > math.pi / 2:
            raise DomainError(f"x={x} outside (-pi/(2 sqrt L), pi/(2 sqrt L))")
        return max(math.cos(r * x), 0.0) ** p
    if L == 0:
        return 1.0
    return math.cosh(math.sqrt(-L) * x) ** p


class EndpointKind(enum.Enum):
    REGULAR = "regular"
    SINGULAR = "singular"


@dataclass(frozen=True)
class Endpoint:
    """End of a model interval.

    ``side`` is +1 when the domain lies to the right of ``position`` and -1 when it
    lies to the left.  At a singular endpoint the density behaves like
    ``dist**exponent`` and the drift, written in the distance ``s``, is
    ``exponent * sqrt(curvature) * cot(sqrt(curvature) * s)`` (``coth`` for negative
    curvature, ``exponent/s`` for zero).
    """

    position: float
    side: int
    kind: EndpointKind = EndpointKind.REGULAR
    exponent: float = 0.0
    curvature: float = 0.0

    @property
    def singular(self) -> bool:
        return self.kind is EndpointKind.SINGULAR


def series_coefficients(p: float, curvature: float, lam: float) -> tuple[float, float, float]:
    """Coefficients (A, B, C) of the regular solution ``1 + A s^2 + B s^4 + C s^6``.

    Obtained by substituting the even series into
    ``v'' + (p/s + c1 s + c3 s^3) v' = -lam v`` with ``c1 = -p L/3`` and
    ``c3 = -p L^2/45`` (Laurent expansion of ``p sqrt(L) cot(sqrt(L) s)``).
    """
    c1 = -p * curvature / 3.0
    c3 = -p * curvature**2 / 45.0
    A = -lam / (2.0 * (p + 1.0))
    B = -A * (lam + 2.0 * c1) / (4.0 * (p + 3.0))
    C = -(lam * B + 4.0 * c1 * B + 2.0 * c3 * A) / (6.0 * (p + 5.0))
    return A, B, C


def regular_series(endpoint: Endpoint, lam: float, s: float) -> tuple[float, float, float]:
    """Regular solution near a singular endpoint, normalized to 1 there.

    Returns ``(phi, dphi/ds, truncation)`` where the quartic series is used and
    ``truncation`` bounds the size of the dropped sixth-order term.
    """
    A, B, C = series_coefficients(endpoint.exponent, endpoint.curvature, lam)
    s2 = s * s
    phi = 1.0 + s2 * (A + B * s2)
    dphi = s * (2.0 * A + 4.0 * B * s2)
    trunc = max(abs(C) * s2**3, 6.0 * abs(C) * s2 * s2 * s)
    return phi, dphi, trunc


def frobenius_start(
    endpoint: Endpoint, lam: float, v0: float, h0: float, tol: float = 1e-12
) -> tuple[float, float]:
    """Launch values ``(v, dv/dx)`` at distance ``h0`` inside the domain.

    The solution is the one that stays bounded with ``v -> v0`` and ``v' -> 0`` at the
    endpoint.  Raises :class:`DomainError` if the estimated truncation error exceeds
    ``tol``.
    """
    if h0 <= 0:
        raise DomainError("h0 must be positive")
    if lam == 0.0:
        return v0, 0.0
    phi, dphi, trunc = regular_series(endpoint, lam, h0)
    if abs(v0) * trunc > tol:
        raise DomainError(f"h0={h0} too large: series truncation {abs(v0) * trunc:.3e} > {tol:.1e}")
    return v0 * phi, endpoint.side * v0 * dphi


def series_offset(
    endpoint: Endpoint, lam: float, length: float, tol: float = 1e-12, initial: float = 1e-4
) -> float:
    """Series offset ``initial * length``, halved until the truncation fits ``tol``."""
    h = initial * length
    for _ in range(200):
        _, _, trunc = regular_series(endpoint, lam, h)
        if trunc <= tol:
            return h
        h *= 0.5
    raise DomainError("could not find a series offset meeting the tolerance")


def singular_flux(endpoint: Endpoint, lam: float, x: float, v: float, dv: float, rho: float) -> float:
    """Series-consistent weighted flux at a singular endpoint.

    ``rho * (v' - v * phi'/phi)`` with ``phi`` the regular local solution.  It is
    proportional to the coefficient of the unbounded local solution in ``v`` and is
    zero exactly when ``v`` satisfies the natural (Neumann) condition there.
    """
    s = abs(x - endpoint.position)
    phi, dphi, _ = regular_series(endpoint, lam, s)
    return rho * (dv - v * endpoint.side * dphi / phi)


@dataclass(frozen=True, init=False)
class SymmetricModel:
    """Neumann model ``v'' - (N-1) T v' = -lam v`` on ``(-d/2, d/2)``."""

    cd: CurvatureDimension
    d: float

    def __init__(self, cd: CurvatureDimension, d: float):
        if not (d > 0 and math.isfinite(d)):
            raise DomainError(f"d must be positive and finite, got {d}")
        dm = d_max(cd)
        if d > dm * (1 + _DMAX_RTOL):
            raise DomainError(f"d={d!r} exceeds d_max={dm!r} for K={cd.K}, N={cd.N}")
        if math.isfinite(dm) and d >= dm * (1 - _DMAX_RTOL):
            d = dm
        object.__setattr__(self, "cd", cd)
        object.__setattr__(self, "d", float(d))

    @property
    def singular(self) -> bool:
        return self.d == d_max(self.cd)

    @property
    def L(self) -> float:
        return self.cd.L if self.cd.N > 1 else 0.0

    @property
    def drift_free(self) -> bool:
        return self.cd.N == 1 or self.cd.K == 0

    def drift(self, x: float) -> float:
        if self.cd.N == 1:
            return 0.0
        return (self.cd.N - 1) * drift_T(self.cd, x)

    def weight(self, x: float) -> float:
        return weight_rho(self.cd, x)

    @property
    def endpoints(self) -> tuple[Endpoint, Endpoint]:
        h = self.d / 2
        if self.singular:
            p, L = self.cd.N - 1, self.cd.L
            return (
                Endpoint(-h, +1, EndpointKind.SINGULAR, p, L),
                Endpoint(h, -1, EndpointKind.SINGULAR, p, L),
            )
        return Endpoint(-h, +1), Endpoint(h, -1)


class Family(enum.Enum):
    TRIG = "trig"
    POWER = "power"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class OneSidedModel:
    """Model ``(R, l)`` with density vanishing at the left endpoint ``a``.

    Densities: ``cos**(l-1)(sqrt(L) s)`` (R > 0), ``s**(l-1)`` (R = 0),
    ``sinh**(l-1)(sqrt(-L) s)`` (R < 0), with ``L = R/(l-1)``.
    """

    R: float
    l: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and math.isfinite(self.l)):
            raise DomainError("R and l must be finite")
        if self.l <= 1:
            raise DomainError(f"l must be > 1, got {self.l}")

    @property
    def L(self) -> float:
        return self.R / (self.l - 1)

    @property
    def family(self) -> Family:
        if self.R > 0:
            return Family.TRIG
        if self.R == 0:
            return Family.POWER
        return Family.HYPERBOLIC

    @property
    def a(self) -> float:
        if self.R > 0:
            return -math.pi / (2 * math.sqrt(self.L))
        return 0.0

    @property
    def right_end(self) -> float:
        return -self.a if self.R > 0 else math.inf

    @property
    def left(self) -> Endpoint:
        return Endpoint(self.a, +1, EndpointKind.SINGULAR, self.l - 1, self.L)

    @property
    def right(self) -> Endpoint | None:
        if self.R > 0:
            return Endpoint(-self.a, -1, EndpointKind.SINGULAR, self.l - 1, self.L)
        return None

    def _check(self, s: float) -> None:
        if s < self.a or s > self.right_end:
            raise DomainError(f"s={s} outside [{self.a}, {self.right_end}]")

    def density(self, s: float) -> float:
        self._check(s)
        p = self.l - 1
        fam = self.family
        if fam is Family.TRIG:
            return max(math.cos(math.sqrt(self.L) * s), 0.0) ** p
        if fam is Family.POWER:
            return s**p
        return math.sinh(math.sqrt(-self.L) * s) ** p

    def drift(self, s: float) -> float:
        """``c = -rho'/rho``; singular at ``a`` (and at ``-a`` for the trig family)."""
        p = self.l - 1
        fam = self.family
        if fam is Family.TRIG:
            r = math.sqrt(self.L)
            if abs(r * s) >= math.pi / 2:
                raise DomainError(f"s={s} at or beyond the tan singularity")
            return p * r * math.tan(r * s)
        if s <= 0:
            raise DomainError(f"s={s} must be positive for the {fam.value} family")
        if fam is Family.POWER:
            return -p / s
        r = math.sqrt(-self.L)
        return -p * r / math.tanh(r * s)


def one_sided_density(model: OneSidedModel, s: float) -> float:
    return model.density(s)
