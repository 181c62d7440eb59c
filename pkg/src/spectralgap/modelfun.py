"""One-sided model functions and the comparison checks built on them.

``v_{R,l}`` solves ``v'' - c v' = -lam v`` from the point ``a`` where the density
vanishes, with ``v(a) = -1`` and ``v'(a) = 0``.  ``b`` is its first critical point
after ``a`` and ``m_{R,l} = v(b)``.  The same machinery, started from regular
points of shifted model intervals, matches a given eigenvalue and maximum to a
Neumann interval of the model operator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import BracketError, NoCriticalPointError, PreconditionError, SpectralGapError
from .gapbound import count_sign_changes, lichnerowicz
from .models import (
    CurvatureDimension,
    Endpoint,
    EndpointKind,
    Family,
    OneSidedModel,
    frobenius_start,
    regular_series,
    series_coefficients,
    series_offset,
    singular_flux,
)
from .ode_ivp import (
    IntegratorConfig,
    Trajectory,
    first_critical_point,
    integrate_eigen_ode,
    weighted_flux_residual,
)

PROFILE_CONFIG = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)

# a crossing this close (relative to the interval) to a singular right end is
# treated as possibly produced by the unbounded local solution
_END_LAYER = 0.05
# normalized singular flux below which the trajectory is taken as regular at the end
_REGULAR_TOL = 1e-8


@dataclass
class ModelProfile:
    model: OneSidedModel
    lam: float
    b: float
    m: float
    trajectory: Trajectory

    @property
    def a(self) -> float:
        return self.model.a

    def flux_residual(self, relative: bool = False) -> float:
        """Largest ``|lam int_a^s rho v + rho(s) v'(s)|`` along the profile.

        With ``relative`` the residual is divided by ``max(1, max |rho v'|)``, which
        matters for the hyperbolic family whose density grows exponentially.
        """
        res = weighted_flux_residual(self.trajectory, self.model.density)
        worst = float(np.max(np.abs(res)))
        if relative:
            t = self.trajectory
            flux = max(abs(self.model.density(min(max(x, self.a), self.model.right_end)) * w)
                       for x, w in zip(t.x, t.dv))
            worst /= max(1.0, flux)
        return worst


def _domain_scale(model: OneSidedModel, lam: float) -> float:
    scale = math.pi / math.sqrt(lam)
    if model.family is Family.TRIG:
        scale = min(scale, model.right_end - model.a)
    return scale


def _reach_singular_end(drift, weight, end: Endpoint, lam, x0, v0, dv0, length, cfg):
    """Integrate up to the series offset before a singular right end.

    Returns ``(trajectory, flux_norm, m)`` where ``flux_norm`` is the singular flux
    scaled by the largest ``|rho v'|`` on the way, and ``m`` the bounded-solution
    value at the end implied by the last sample.
    """
    h = series_offset(end, lam, length, cfg.abs_tol)
    xe = end.position - h
    traj = integrate_eigen_ode(drift, lam, x0, v0, dv0, xe, cfg)
    ve, dve = float(traj.v[-1]), float(traj.dv[-1])
    D = singular_flux(end, lam, xe, ve, dve, weight(xe))
    scale = max(abs(weight(t) * w) for t, w in zip(traj.x, traj.dv))
    return traj, abs(D) / max(scale, 1e-300), _end_value(traj, end, lam, h, length)


def _end_value(traj: Trajectory, end: Endpoint, lam: float, h: float, length: float) -> float:
    """Value of the bounded part of ``v`` at a singular end.

    Near the end ``v = m phi(s) + beta psi(s)`` with ``phi`` the regular series and
    ``psi ~ s**(1-p)`` (``log s`` for p = 1).  Two samples, far enough from the end
    that ``psi`` is tame and close enough that the sextic series is accurate, fix
    ``m`` and ``beta``.
    """
    A, B, C = series_coefficients(end.exponent, end.curvature, lam)
    s1 = 0.25 * length if C == 0 else min((1e-9 / abs(C)) ** (1 / 6), 0.25 * length)
    s1 = max(s1, 2 * h)
    s2 = 0.5 * s1
    p = end.exponent
    rows, rhs = [], []
    for s in (s1, s2):
        s2_ = s * s
        phi = 1.0 + s2_ * (A + s2_ * (B + C * s2_))
        psi = math.log(s) if p == 1 else s ** (1 - p)
        rows.append((phi, psi))
        rhs.append(traj(end.position + end.side * s)[0])
    m, _ = np.linalg.solve(np.array(rows), np.array(rhs))
    return float(m)


def _critical_or_end(drift, weight, end: Endpoint | None, lam, x0, v0, dv0, x1, length, cfg):
    """First critical point after ``x0``; a singular right end counts when ``v`` is regular there.

    At a singular right end the bounded solution has ``v' -> 0``, so the end is the
    critical point exactly when the unbounded component is absent.  A crossing found
    in the last layer before such an end is accepted only if the trajectory is not
    in fact the bounded solution.
    """
    try:
        b, vb, traj = first_critical_point(drift, lam, x0, v0, dv0, x1, cfg)
    except NoCriticalPointError:
        if end is None:
            raise
        b = None
    if end is None or (b is not None and end.position - b > _END_LAYER * length):
        return b, vb, traj
    tail, flux, m = _reach_singular_end(drift, weight, end, lam, x0, v0, dv0, length, cfg)
    if flux <= _REGULAR_TOL:
        A, _, _ = series_coefficients(end.exponent, end.curvature, lam)
        tail = tail.with_tail(end.position, m, 0.0, 2.0 * A * m)
        tail.meta["singular_end"] = True
        return end.position, m, tail
    if b is None:
        raise NoCriticalPointError(
            f"v' has no zero before the singular end {end.position} for lam={lam}", tail
        )
    return b, vb, traj


def model_profile(R: float, l: float, lam: float, config: IntegratorConfig | None = None) -> ModelProfile:
    """``v_{R,l}`` on ``[a, b]`` with ``v(a) = -1``, ``v'(a) = 0``."""
    if not lam > 0:
        raise PreconditionError("lam must be positive")
    cfg = config or PROFILE_CONFIG
    model = OneSidedModel(R, l)
    left = model.left
    length = _domain_scale(model, lam)
    h = series_offset(left, lam, length, cfg.abs_tol)
    v0, dv0 = frobenius_start(left, lam, -1.0, h, cfg.abs_tol)
    x0 = model.a + h
    if model.family is Family.TRIG:
        right = model.right
        x1 = right.position - 1e-6 * length
    else:
        right = None
        # far enough for several oscillations of the drift-free part
        x1 = model.a + 200.0 * math.pi / math.sqrt(lam)
    b, vb, traj = _critical_or_end(model.drift, model.density, right, lam, x0, v0, dv0, x1, length, cfg)
    A, _, _ = series_coefficients(left.exponent, left.curvature, lam)
    traj = traj.with_head(model.a, -1.0, 0.0, -2.0 * A)
    return ModelProfile(model, lam, b, vb, traj)


def m_value(R: float, l: float, lam: float, config: IntegratorConfig | None = None) -> float:
    return model_profile(R, l, lam, config).m


class MatchFamily(enum.Enum):
    COS = "cos"
    POWER = "power"
    SINH = "sinh"
    COSH = "cosh"
    FLAT = "flat"


@dataclass(frozen=True)
class _Shifted:
    """A model operator on its whole line, with trial left ends ``a_m``."""

    family: MatchFamily
    p: float
    r: float  # sqrt(|L|)

    def drift(self, s: float) -> float:
        p, r = self.p, self.r
        if self.family is MatchFamily.COS:
            return p * r * math.tan(r * s)
        if self.family is MatchFamily.POWER:
            return -p / s
        if self.family is MatchFamily.SINH:
            return -p * r / math.tanh(r * s)
        if self.family is MatchFamily.COSH:
            return -p * r * math.tanh(r * s)
        return 0.0

    def weight(self, s: float) -> float:
        p, r = self.p, self.r
        if self.family is MatchFamily.COS:
            return max(math.cos(r * s), 0.0) ** p
        if self.family is MatchFamily.POWER:
            return max(s, 0.0) ** p
        if self.family is MatchFamily.SINH:
            return max(math.sinh(r * s), 0.0) ** p
        if self.family is MatchFamily.COSH:
            return math.cosh(r * s) ** p
        return 1.0

    @property
    def singular_left(self) -> float | None:
        if self.family is MatchFamily.COS:
            return -math.pi / (2 * self.r)
        if self.family in (MatchFamily.POWER, MatchFamily.SINH):
            return 0.0
        return None

    @property
    def right_end(self) -> Endpoint | None:
        if self.family is MatchFamily.COS:
            return Endpoint(math.pi / (2 * self.r), -1, EndpointKind.SINGULAR, self.p, self.r**2)
        return None


@dataclass
class MatchedInterval:
    """Neumann interval ``[a, b]`` of a model operator with eigenfunction ``v``.

    ``v(a) = -1`` and ``v(b)`` is the matched maximum; ``weight`` is the model density.
    """

    a: float
    b: float
    trajectory: Trajectory
    lam: float
    family: MatchFamily
    weight: Callable[[float], float] = field(repr=False)
    diagnostics: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.a, self.b, self.trajectory))

    @property
    def max_v(self) -> float:
        return float(self.trajectory.v[-1])


def _shifted_profile(fam: _Shifted, R: float, N: float, lam: float, a_m: float, cfg) -> MatchedInterval:
    """Eigenfunction from ``a_m`` (regular start, or the singular left end itself)."""
    scale = math.pi / math.sqrt(lam)
    sing = fam.singular_left
    if sing is not None and a_m == sing:
        prof = model_profile(R, N, lam, cfg)
        # the shifted power/sinh families coincide with the one-sided model
        return MatchedInterval(prof.a, prof.b, prof.trajectory, lam, fam.family, fam.weight)
    right = fam.right_end
    if right is not None:
        length = right.position - a_m
        x1 = right.position - 1e-6 * length
    else:
        length = scale
        x1 = a_m + 200.0 * scale
    b, vb, traj = _critical_or_end(fam.drift, fam.weight, right, lam, a_m, -1.0, 0.0, x1, length, cfg)
    return MatchedInterval(a_m, b, traj, lam, fam.family, fam.weight)


def _symmetric_left(fam: _Shifted, lam: float, cfg) -> float:
    """Left end of the symmetric interval, from the odd solution started at 0."""
    right = fam.right_end
    scale = math.pi / math.sqrt(lam)
    x1 = right.position - 1e-6 * right.position if right is not None else 200.0 * scale
    b, _, _ = _critical_or_end(fam.drift, fam.weight, right, lam, 0.0, 0.0, 1.0, x1,
                               right.position if right is not None else scale, cfg)
    return -b


def _flat_match(lam: float, cfg) -> MatchedInterval:
    half = 0.5 * math.pi / math.sqrt(lam)
    fam = _Shifted(MatchFamily.FLAT, 0.0, 0.0)
    b, _, traj = first_critical_point(fam.drift, lam, -half, -1.0, 0.0, 3 * half, cfg)
    return MatchedInterval(-half, b, traj, lam, MatchFamily.FLAT, fam.weight)


def match_interval(
    R: float,
    N: float,
    lambda1: float,
    max_f: float,
    config: IntegratorConfig | None = None,
    *,
    samples: int = 24,
    xtol: float = 1e-12,
) -> MatchedInterval:
    """Neumann interval of the ``(R, N)`` model with eigenvalue ``lambda1`` and ``max v = max_f``.

    Candidate left ends ``a_m`` are scanned in each shifted family, every sign change
    of ``v(b(a_m)) - max_f`` is recorded, and the bracket nearest the symmetric
    configuration is refined by Brent's method.  Monotonicity in ``a_m`` is not
    assumed.
    """
    cfg = config or PROFILE_CONFIG
    if not 0 < max_f <= 1:
        raise PreconditionError("max_f must lie in (0, 1]")
    if not lambda1 > 0:
        raise PreconditionError("lambda1 must be positive")
    if N < 1:
        raise PreconditionError("N must be >= 1")
    if R > 0:
        if N == 1:
            raise PreconditionError("R > 0 needs N > 1")
        lich = lichnerowicz(CurvatureDimension(R, N))
        # equality is the full-interval case, where the match is the whole model domain
        if lambda1 < lich * (1 - 1e-12):
            raise PreconditionError(f"lambda1={lambda1} is below N R/(N-1)={lich}")
    if N == 1 or (R == 0 and max_f == 1):
        if max_f != 1:
            raise BracketError("a drift-free model only attains max v = 1")
        return _flat_match(lambda1, cfg)

    p = N - 1
    r = math.sqrt(abs(R) / p)
    scale = math.pi / math.sqrt(lambda1)
    geometric = [scale * 2.0**k for k in range(-8, 7)]
    plans = []
    if R > 0:
        fam = _Shifted(MatchFamily.COS, p, r)
        sing = fam.singular_left
        try:
            a_sym = _symmetric_left(fam, lambda1, cfg)
        except NoCriticalPointError:
            a_sym = sing
        grid = [sing + (a_sym - sing) * t for t in np.linspace(0.0, 1.0, samples)]
        grid += [a_sym + (-sing - a_sym) * t for t in np.linspace(0.0, 1.0, samples)[1:-1]]
        plans.append((fam, sorted(set(grid)), a_sym))
    elif R == 0:
        fam = _Shifted(MatchFamily.POWER, p, 0.0)
        plans.append((fam, [0.0] + geometric, math.inf))
    else:
        fam = _Shifted(MatchFamily.COSH, p, r)
        a_sym = _symmetric_left(fam, lambda1, cfg)
        grid = [a_sym + g for g in [0.0] + geometric] + [a_sym - g for g in geometric]
        plans.append((fam, sorted(set(grid)), a_sym))
        fam = _Shifted(MatchFamily.SINH, p, r)
        plans.append((fam, [0.0] + geometric, math.inf))

    scanned = []
    for fam, grid, a_sym in plans:
        values = []
        for a_m in grid:
            try:
                prof = _shifted_profile(fam, R, N, lambda1, a_m, cfg)
            except NoCriticalPointError:
                continue
            g = prof.max_v - max_f
            if abs(g) <= 1e-12:
                return _finish(prof, R, N, max_f, {"scan": len(grid)})
            values.append((a_m, g))
        scanned.append((fam.family.value, len(values)))
        brackets = [
            (x0, x1)
            for (x0, g0), (x1, g1) in zip(values, values[1:])
            if g0 * g1 < 0
        ]
        if not brackets:
            continue
        lo, hi = min(brackets, key=lambda br: min(abs(br[0] - a_sym), abs(br[1] - a_sym)))

        def g(a_m):
            return _shifted_profile(fam, R, N, lambda1, a_m, cfg).max_v - max_f

        a_m = brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
        prof = _shifted_profile(fam, R, N, lambda1, a_m, cfg)
        return _finish(prof, R, N, max_f, {"bracket": (lo, hi), "brackets": len(brackets)})
    raise BracketError(
        f"max_f={max_f} not attained for R={R}, N={N}, lambda1={lambda1} (scanned {scanned})"
    )


def _finish(prof: MatchedInterval, R, N, max_f, diag) -> MatchedInterval:
    # v increases from -1 to max_f > 0, so it crosses zero exactly once
    if count_sign_changes(prof.trajectory.v) != 1:
        raise SpectralGapError("matched eigenfunction does not have exactly one interior zero")
    prof.diagnostics.update(diag, R=R, N=N, target=max_f)
    return prof


def inverse_gradient_profile(traj: Trajectory, samples: int = 4001) -> PchipInterpolator:
    """Monotone interpolant of ``y -> (v' o v^{-1})(y)^2`` on ``[v(a), v(b)]``."""
    xs = np.linspace(traj.x[0], traj.x[-1], samples)
    v, dv = traj(xs)
    keep = np.concatenate(([True], np.diff(v) > 0))
    if not np.all(keep):
        raise SpectralGapError("model eigenfunction is not strictly increasing")
    return PchipInterpolator(v, dv**2, extrapolate=False)


@dataclass
class GradientReport:
    max_violation: float
    max_gamma: float
    lambda_space: float
    lambda_model: float
    n: int
    passed: bool


def check_gradient_comparison(space, model: MatchedInterval, tol: float = 1e-4, n: int = 1024) -> GradientReport:
    """``max_i [Gamma(f)(x_i) - (v' o v^{-1})^2(f(x_i))]`` over interior cells.

    ``f`` is the space's discrete first eigenfunction (min -1), ``Gamma(f)`` is
    taken by central differences, and ``model`` supplies ``v`` with the same
    eigenvalue.
    """
    from .spaces import first_neumann_eigenpair

    pair = first_neumann_eigenpair(space, n)
    if abs(pair.lam - model.lam) > max(tol, pair.err) * max(1.0, model.lam):
        raise PreconditionError(f"space eigenvalue {pair.lam} differs from the model's {model.lam}")
    f = pair.f
    v_lo, v_hi = float(model.trajectory.v[0]), float(model.trajectory.v[-1])
    slack = tol
    if f.min() < v_lo - slack or f.max() > v_hi + slack:
        raise PreconditionError(
            f"range [{f.min()}, {f.max()}] is not inside the model range [{v_lo}, {v_hi}]"
        )
    h = pair.x[1] - pair.x[0]
    gamma = ((f[2:] - f[:-2]) / (2 * h)) ** 2
    w = inverse_gradient_profile(model.trajectory)(np.clip(f[1:-1], v_lo, v_hi))
    diff = gamma - w
    worst = float(np.max(diff)) if diff.size else 0.0
    gmax = float(np.max(gamma)) if gamma.size else 0.0
    return GradientReport(worst, gmax, pair.lam, model.lam, n, worst <= tol * (1 + gmax))


def gradient_model_for(space, l: float | None = None, n: int = 1024) -> MatchedInterval:
    """Model ``L_{K,l}`` eigenfunction matched to the space's eigenvalue and maximum."""
    from .spaces import first_neumann_eigenpair

    pair = first_neumann_eigenpair(space, n)
    l = space.N if l is None else l
    return match_interval(space.K, l, pair.lam, min(float(pair.f.max()), 1.0))


@dataclass
class MaxReport:
    max_f: float
    m: float
    lam: float
    passed: bool


def check_max_comparison(space, tol: float = 1e-4, n: int = 1024, N: float | None = None) -> MaxReport:
    """``max f >= m_{K,N}`` for the space's normalized first eigenfunction.

    ``N`` may raise the declared dimension (a CD(K, N) space is CD(K, N') for
    N' >= N), which is needed for spaces declared with N = 1.
    """
    from .spaces import first_neumann_eigenpair

    K = space.K
    N = space.N if N is None else max(N, space.N)
    if N <= 1:
        raise PreconditionError("the one-sided model needs N > 1")
    pair = first_neumann_eigenpair(space, n)
    lam = pair.lam
    if K > 0:
        # the discrete eigenvalue may sit a hair below N K/(N-1) on full-range intervals
        lam = max(lam, lichnerowicz(CurvatureDimension(K, N)) * (1 + 1e-9))
    m = m_value(K, N, lam)
    max_f = float(pair.f.max())
    return MaxReport(max_f, m, lam, max_f >= m - tol)
