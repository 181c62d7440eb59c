"""The gap bound ``hat_lambda(K, N, d)``.

``hat_lambda`` is the first nonzero Neumann eigenvalue of the symmetric model on
``(-d/2, d/2)``.  It is computed by shooting (Neumann miss function plus Brent) and
by finite-volume discretization with Richardson extrapolation; the two routes are
independent and are cross-checked by ``method="both"``.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, MethodDisagreement, PreconditionError
from .models import (
    CurvatureDimension,
    SymmetricModel,
    frobenius_start,
    series_offset,
    singular_flux,
)
from .ode_ivp import IntegratorConfig, Trajectory, integrate_eigen_ode
from .tridiag_eigen import assemble_neumann, eigenvalue_k

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_GRIDS = (512, 1024, 2048)
SHOOTING_CONFIG = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)


class Method(str, enum.Enum):
    SHOOTING = "shooting"
    DISCRETIZATION = "discretization"
    BOTH = "both"
    CLOSED_FORM = "closed_form"


@dataclass
class SpectralResult:
    lam: float
    method: Method
    achieved_tol: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"eigenvalue must be positive, got {self.lam}")

    def as_record(self) -> dict:
        return {"lambda_hat": self.lam, "method": self.method.value, "achieved_tol": self.achieved_tol}


def count_sign_changes(values: np.ndarray) -> int:
    s = np.sign(np.asarray(values))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def shoot(model: SymmetricModel, lam: float, config: IntegratorConfig | None = None) -> tuple[float, int, Trajectory]:
    """Integrate from the left end with ``v = 1, v' = 0``; see :func:`miss_function`."""
    cfg = config or SHOOTING_CONFIG
    left, right = model.endpoints
    d = model.d
    if left.singular:
        h = series_offset(left, lam, d, cfg.abs_tol)
        v0, dv0 = frobenius_start(left, lam, 1.0, h, cfg.abs_tol)
        xs = left.position + h
    else:
        xs, v0, dv0 = left.position, 1.0, 0.0
    xe = right.position
    if right.singular:
        xe -= series_offset(right, lam, d, cfg.abs_tol)
    traj = integrate_eigen_ode(model.drift, lam, xs, v0, dv0, xe, cfg)
    ve, dve = float(traj.v[-1]), float(traj.dv[-1])
    if right.singular:
        D = singular_flux(right, lam, xe, ve, dve, model.weight(xe))
    else:
        D = dve
    return D, count_sign_changes(traj.v), traj


def miss_function(model: SymmetricModel, lam: float, config: IntegratorConfig | None = None) -> tuple[float, int]:
    """Neumann residual ``D(lam)`` at the right end and the interior zero count of ``v``.

    At a regular right end ``D = v'``; at a singular one it is the series-consistent
    weighted flux, which vanishes exactly when ``v`` is the bounded solution there.
    """
    if not lam > 0:
        raise PreconditionError("lam must be positive")
    D, count, _ = shoot(model, lam, config)
    return D, count


def lichnerowicz(cd: CurvatureDimension) -> float:
    if not (cd.K > 0 and cd.N > 1):
        raise PreconditionError("the Lichnerowicz value needs K > 0 and N > 1")
    return cd.N * cd.K / (cd.N - 1)


def remark_bound(N: float, d: float) -> float:
    """``N / (1 - cos(d/2)**N)``, the closed-form bound for K = N - 1."""
    if not N > 1:
        raise PreconditionError("N must be > 1")
    if not 0 < d <= math.pi:
        raise PreconditionError("d must lie in (0, pi]")
    return N / (1.0 - math.cos(d / 2) ** N)


def _seed(cd: CurvatureDimension, d: float) -> float:
    s = math.pi**2 / d**2
    if cd.K > 0 and cd.N > 1:
        s = min(s, lichnerowicz(cd))
    return s


def shooting_hat_lambda(
    cd: CurvatureDimension, d: float, tol: float = DEFAULT_TOL, config: IntegratorConfig | None = None
) -> SpectralResult:
    """Smallest positive root of ``D`` on the one-interior-zero branch."""
    model = SymmetricModel(cd, d)
    evals = 0

    def probe(lam):
        nonlocal evals
        evals += 1
        D, c, _ = shoot(model, lam, config)
        return D, c

    def below(D, c):
        return c == 0 or (c == 1 and D < 0)

    cap = 1e6 * math.pi**2 / d**2
    lam = 0.5 * _seed(cd, d)
    D, c = probe(lam)
    if below(D, c):
        lo, lo_state = lam, (D, c)
        while True:
            lam *= 2.0
            if lam > cap:
                raise BracketError(f"bracket scan exhausted at lam={lam:.3e}")
            D, c = probe(lam)
            if not below(D, c):
                hi, hi_state = lam, (D, c)
                break
            lo, lo_state = lam, (D, c)
    else:
        hi, hi_state = lam, (D, c)
        while True:
            lam *= 0.5
            if lam < 1e-12 * cap:
                raise BracketError("bracket scan found no lower end")
            D, c = probe(lam)
            if below(D, c):
                lo, lo_state = lam, (D, c)
                break
            hi, hi_state = lam, (D, c)

    # Below the first eigenvalue D < 0 with at most one zero.  Above it, D > 0 until
    # the second eigenvalue, with one zero (regular right end) or two (singular
    # right end, where the unbounded local solution adds a zero next to the end).
    # Shrink until the upper end is on that stretch, so D has a single root inside.
    scan_iters = 0
    while not (hi_state[1] in (1, 2) and hi_state[0] > 0):
        scan_iters += 1
        if scan_iters > 200:
            raise BracketError("could not isolate the first-eigenvalue branch")
        mid = 0.5 * (lo + hi)
        D, c = probe(mid)
        if D == 0.0 and c == 1:
            return SpectralResult(mid, Method.SHOOTING, 0.0,
                                  {"bracket": (mid, mid), "evaluations": evals})
        if below(D, c):
            lo, lo_state = mid, (D, c)
        else:
            hi, hi_state = mid, (D, c)

    xtol = 0.5 * tol
    rtol = 4 * np.finfo(float).eps
    root, info = brentq(lambda x: probe(x)[0], lo, hi, xtol=xtol, rtol=rtol, full_output=True)
    if not info.converged:
        raise BracketError("Brent iteration did not converge")
    achieved = xtol + rtol * abs(root)
    return SpectralResult(
        root,
        Method.SHOOTING,
        achieved,
        {"bracket": (lo, hi), "iterations": info.iterations, "evaluations": evals},
    )


def discretization_hat_lambda(
    cd: CurvatureDimension, d: float, grids: tuple[int, ...] = DEFAULT_GRIDS, tol: float = DEFAULT_TOL
) -> SpectralResult:
    """Second pencil eigenvalue on each grid, Richardson-extrapolated at order 2."""
    if len(grids) < 2:
        raise PreconditionError("need at least two grids")
    model = SymmetricModel(cd, d)
    interval = (-model.d / 2, model.d / 2)
    bisect_tol = 1e-13 * max(1.0, _seed(cd, d))
    values = []
    for n in grids:
        pencil = assemble_neumann(model.weight, interval, n)
        values.append(eigenvalue_k(pencil, 1, bisect_tol))
    values = np.array(values)
    rich = values[1:] + (values[1:] - values[:-1]) / 3.0
    diag = {"grids": tuple(grids), "values": values.tolist()}
    if len(grids) >= 3:
        diffs = np.diff(values)
        order = float(np.log2(abs(diffs[-2] / diffs[-1]))) if diffs[-1] != 0 else math.inf
        diag["observed_order"] = order
        scale = max(abs(values[-1]), 1.0)
        if abs(diffs[-1]) > 1e-12 * scale and not 1.7 <= order <= 2.3:
            warnings.warn(
                f"observed discretization order {order:.3f} outside [1.7, 2.3] "
                f"for K={cd.K}, N={cd.N}, d={d}",
                RuntimeWarning,
                stacklevel=2,
            )
        err = float(abs(rich[-1] - rich[-2]))
    else:
        err = float(abs(values[-1] - values[-2]) / 3.0)
    achieved = max(err, bisect_tol)
    return SpectralResult(float(rich[-1]), Method.DISCRETIZATION, achieved, diag)


def hat_lambda(
    cd: CurvatureDimension,
    d: float,
    tol: float = DEFAULT_TOL,
    method: Method | str = Method.SHOOTING,
    config: IntegratorConfig | None = None,
    grids: tuple[int, ...] = DEFAULT_GRIDS,
) -> SpectralResult:
    """First nonzero Neumann eigenvalue of the symmetric model.

    Drift-free models (K = 0 or N = 1) return the closed form ``pi^2/d^2``.
    """
    method = Method(method)
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    model = SymmetricModel(cd, d)  # validates d against d_max
    if model.drift_free:
        return SpectralResult(math.pi**2 / model.d**2, Method.CLOSED_FORM, 0.0, {})
    if method is Method.SHOOTING:
        return shooting_hat_lambda(cd, model.d, tol, config)
    if method is Method.DISCRETIZATION:
        return discretization_hat_lambda(cd, model.d, grids, tol)
    if method is Method.BOTH:
        s = shooting_hat_lambda(cd, model.d, tol, config)
        g = discretization_hat_lambda(cd, model.d, grids, tol)
        gap = abs(s.lam - g.lam)
        if gap > 10 * tol:
            raise MethodDisagreement(
                f"shooting {s.lam!r} vs discretization {g.lam!r} differ by {gap:.3e} > {10 * tol:.1e}"
            )
        diag = dict(s.diagnostics)
        diag.update(discretization=g.lam, discretization_err=g.achieved_tol, agreement=gap)
        return SpectralResult(s.lam, Method.BOTH, s.achieved_tol, diag)
    raise PreconditionError(f"unsupported method {method}")
