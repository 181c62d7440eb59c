"""Adaptive Dormand-Prince 5(4) integration of ``v'' = c(x) v' - lam v``.

The system is integrated in first-order form ``y = (v, v')`` with a PI step-size
controller.  Dense output between accepted steps is quintic Hermite interpolation
using ``v, v', v''`` at both step ends (``v''`` comes from the ODE itself), so it
costs no extra right-hand-side evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import IntegrationError, NoCriticalPointError, PreconditionError

Drift = Callable[[float], float]

# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth minus fourth order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

# PI controller constants (Hairer & Wanner)
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_SAFE = 0.9
_FAC_MIN, _FAC_MAX = 0.2, 10.0


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not 0 < self.rel_tol < 1e-2:
            raise PreconditionError(f"rel_tol must lie in (0, 1e-2), got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise PreconditionError("abs_tol must be positive")
        if not self.max_step > 0:
            raise PreconditionError("max_step must be positive")
        if self.max_steps <= 0:
            raise PreconditionError("max_steps must be positive")


@dataclass
class Trajectory:
    """Accepted samples of ``(x, v, v', v'')`` plus dense output between them."""

    x: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    ddv: np.ndarray
    lam: float
    accepted: int = 0
    rejected: int = 0
    status: str = "reached_end"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.x)

    @property
    def direction(self) -> float:
        return 1.0 if self.x[-1] >= self.x[0] else -1.0

    def __call__(self, xq):
        """Dense ``(v, v')`` at ``xq`` (scalar or array) inside the covered range."""
        scalar = np.ndim(xq) == 0
        q = np.atleast_1d(np.asarray(xq, dtype=float))
        sgn = self.direction
        xs = self.x * sgn
        qs = q * sgn
        span = abs(xs[-1] - xs[0])
        slack = 1e-12 * max(1.0, span, abs(xs[0]), abs(xs[-1]))
        if np.any(qs < xs[0] - slack) or np.any(qs > xs[-1] + slack):
            raise PreconditionError("dense output requested outside the trajectory")
        i = np.clip(np.searchsorted(xs, qs, side="right") - 1, 0, len(xs) - 2)
        x0, x1 = self.x[i], self.x[i + 1]
        h = x1 - x0
        t = (q - x0) / h
        t2 = t * t
        t3 = t2 * t
        t4 = t3 * t
        t5 = t4 * t
        h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
        h1 = t - 6 * t3 + 8 * t4 - 3 * t5
        h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
        h5 = 10 * t3 - 15 * t4 + 6 * t5
        h4 = -4 * t3 + 7 * t4 - 3 * t5
        h3 = 0.5 * (t3 - 2 * t4 + t5)
        d0 = -30 * t2 + 60 * t3 - 30 * t4
        d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4
        d2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4)
        d5 = -d0
        d4 = -12 * t2 + 28 * t3 - 15 * t4
        d3 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4)
        va, vb = self.v[i], self.v[i + 1]
        da, db = self.dv[i], self.dv[i + 1]
        aa, ab = self.ddv[i], self.ddv[i + 1]
        val = va * h0 + h * da * h1 + h * h * aa * h2 + vb * h5 + h * db * h4 + h * h * ab * h3
        der = (va * d0 + vb * d5) / h + da * d1 + db * d4 + h * (aa * d2 + ab * d3)
        if scalar:
            return float(val[0]), float(der[0])
        return val, der

    def truncate(self, xe: float, drift: Drift) -> "Trajectory":
        """Copy ending exactly at ``xe`` (dense values at the new end)."""
        sgn = self.direction
        keep = self.x * sgn < xe * sgn
        ve, dve = self(xe)
        return Trajectory(
            x=np.append(self.x[keep], xe),
            v=np.append(self.v[keep], ve),
            dv=np.append(self.dv[keep], dve),
            ddv=np.append(self.ddv[keep], drift(xe) * dve - self.lam * ve),
            lam=self.lam,
            accepted=self.accepted,
            rejected=self.rejected,
            status=self.status,
            meta=dict(self.meta),
        )

    def with_tail(self, x: float, v: float, dv: float, ddv: float) -> "Trajectory":
        """Copy with an extra last sample (e.g. a singular end reached by a series)."""
        return Trajectory(
            x=np.append(self.x, x),
            v=np.append(self.v, v),
            dv=np.append(self.dv, dv),
            ddv=np.append(self.ddv, ddv),
            lam=self.lam,
            accepted=self.accepted,
            rejected=self.rejected,
            status=self.status,
            meta=dict(self.meta),
        )

    def with_head(self, x: float, v: float, dv: float, ddv: float) -> "Trajectory":
        """Copy with an extra first sample (e.g. the singular point itself)."""
        return Trajectory(
            x=np.insert(self.x, 0, x),
            v=np.insert(self.v, 0, v),
            dv=np.insert(self.dv, 0, dv),
            ddv=np.insert(self.ddv, 0, ddv),
            lam=self.lam,
            accepted=self.accepted,
            rejected=self.rejected,
            status=self.status,
            meta=dict(self.meta),
        )


def _norm(ev, ew, v0, w0, v1, w1, cfg):
    sv = cfg.abs_tol + cfg.rel_tol * max(abs(v0), abs(v1))
    sw = cfg.abs_tol + cfg.rel_tol * max(abs(w0), abs(w1))
    return math.sqrt(0.5 * ((ev / sv) ** 2 + (ew / sw) ** 2))


def _initial_step(drift, lam, x0, v0, w0, fv, fw, direction, span, cfg):
    sv = cfg.abs_tol + cfg.rel_tol * abs(v0)
    sw = cfg.abs_tol + cfg.rel_tol * abs(w0)
    d0 = math.hypot(v0 / sv, w0 / sw) / math.sqrt(2)
    d1 = math.hypot(fv / sv, fw / sw) / math.sqrt(2)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    x1 = x0 + direction * h0
    v1, w1 = v0 + direction * h0 * fv, w0 + direction * h0 * fw
    gv, gw = w1, drift(x1) * w1 - lam * v1
    d2 = math.hypot((gv - fv) / sv, (gw - fw) / sw) / math.sqrt(2) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span, cfg.max_step)


def _critical_sign(lam, v0, dv0):
    if dv0 != 0.0:
        return math.copysign(1.0, dv0)
    acc = -lam * v0
    if acc != 0.0:
        return math.copysign(1.0, acc)
    return 0.0


def integrate_eigen_ode(
    drift: Drift,
    lam: float,
    x0: float,
    v0: float,
    dv0: float,
    x1: float,
    config: IntegratorConfig | None = None,
    *,
    stop_at_critical: bool = False,
) -> Trajectory:
    """Integrate ``v'' = drift(x) v' - lam v`` from ``x0`` to ``x1``.

    With ``stop_at_critical`` the integration halts after the first accepted step on
    which ``v'`` changes sign (``status == "event"``); :func:`first_critical_point`
    refines the location.
    """
    cfg = config or IntegratorConfig()
    if not math.isfinite(lam):
        raise PreconditionError("lam must be finite")
    span = abs(x1 - x0)
    direction = 1.0 if x1 >= x0 else -1.0
    xs, vs, ws, accs = [x0], [v0], [dv0], []
    c = drift(x0)
    fv, fw = dv0, c * dv0 - lam * v0
    accs.append(fw)
    if span == 0.0:
        return Trajectory(np.array(xs), np.array(vs), np.array(ws), np.array(accs), lam)

    sigma = _critical_sign(lam, v0, dv0) if stop_at_critical else 0.0
    h = _initial_step(drift, lam, x0, v0, dv0, fv, fw, direction, span, cfg)
    x, v, w = x0, v0, dv0
    facold = 1e-4
    accepted = rejected = 0
    last_rejected = False
    status = "reached_end"

    while True:
        if accepted + rejected >= cfg.max_steps:
            traj = Trajectory(np.array(xs), np.array(vs), np.array(ws), np.array(accs), lam,
                              accepted, rejected, "step_limit")
            raise IntegrationError(f"step limit {cfg.max_steps} exceeded at x={x}", traj)
        remaining = abs(x1 - x)
        last = h >= remaining * (1 - 1e-12)
        if last:
            h = remaining
        hs = direction * h

        k1v, k1w = fv, fw
        xv = x + _C2 * hs
        yv = v + hs * _A21 * k1v
        yw = w + hs * _A21 * k1w
        k2v, k2w = yw, drift(xv) * yw - lam * yv
        xv = x + _C3 * hs
        yv = v + hs * (_A31 * k1v + _A32 * k2v)
        yw = w + hs * (_A31 * k1w + _A32 * k2w)
        k3v, k3w = yw, drift(xv) * yw - lam * yv
        xv = x + _C4 * hs
        yv = v + hs * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
        yw = w + hs * (_A41 * k1w + _A42 * k2w + _A43 * k3w)
        k4v, k4w = yw, drift(xv) * yw - lam * yv
        xv = x + _C5 * hs
        yv = v + hs * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
        yw = w + hs * (_A51 * k1w + _A52 * k2w + _A53 * k3w + _A54 * k4w)
        k5v, k5w = yw, drift(xv) * yw - lam * yv
        xn = x1 if last else x + hs
        cn = drift(xn)
        yv = v + hs * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
        yw = w + hs * (_A61 * k1w + _A62 * k2w + _A63 * k3w + _A64 * k4w + _A65 * k5w)
        k6v, k6w = yw, cn * yw - lam * yv
        vn = v + hs * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
        wn = w + hs * (_B1 * k1w + _B3 * k3w + _B4 * k4w + _B5 * k5w + _B6 * k6w)
        k7v, k7w = wn, cn * wn - lam * vn
        ev = hs * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
        ew = hs * (_E1 * k1w + _E3 * k3w + _E4 * k4w + _E5 * k5w + _E6 * k6w + _E7 * k7w)

        if not (math.isfinite(vn) and math.isfinite(wn) and math.isfinite(ev) and math.isfinite(ew)):
            if h > 1e-14 * max(1.0, abs(x)):
                # shrink on overflow before giving up
                h *= 0.1
                rejected += 1
                last_rejected = True
                continue
            traj = Trajectory(np.array(xs), np.array(vs), np.array(ws), np.array(accs), lam,
                              accepted, rejected, "failed")
            raise IntegrationError(f"non-finite state at x={x}", traj)

        err = _norm(ev, ew, v, w, vn, wn, cfg)
        fac11 = err**_EXPO if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / facold**_BETA
            fac = max(1 / _FAC_MAX, min(1 / _FAC_MIN, fac / _SAFE))
            hnew = h / fac
            if last_rejected:
                hnew = min(hnew, h)
            facold = max(err, 1e-4)
            accepted += 1
            last_rejected = False
            x, v, w = xn, vn, wn
            fv, fw = k7v, k7w
            xs.append(x)
            vs.append(v)
            ws.append(w)
            accs.append(fw)
            if sigma != 0.0 and sigma * w <= 0.0:
                status = "event"
                break
            if last:
                break
            h = min(hnew, cfg.max_step)
        else:
            h = h / min(1 / _FAC_MIN, fac11 / _SAFE)
            rejected += 1
            last_rejected = True
            if h < 1e-15 * max(1.0, abs(x)):
                traj = Trajectory(np.array(xs), np.array(vs), np.array(ws), np.array(accs), lam,
                                  accepted, rejected, "failed")
                raise IntegrationError(f"step size underflow at x={x}", traj)

    return Trajectory(np.array(xs), np.array(vs), np.array(ws), np.array(accs), lam,
                      accepted, rejected, status)


def first_critical_point(
    drift: Drift,
    lam: float,
    x0: float,
    v0: float,
    dv0: float,
    x1: float,
    config: IntegratorConfig | None = None,
    xtol: float = 1e-12,
) -> tuple[float, float, Trajectory]:
    """First point after ``x0`` where ``v'`` vanishes, with ``v`` there.

    The sign change is located on accepted steps and refined by bisection on the
    dense output.  The returned trajectory ends exactly at the critical point.
    """
    traj = integrate_eigen_ode(drift, lam, x0, v0, dv0, x1, config, stop_at_critical=True)
    if traj.status != "event":
        raise NoCriticalPointError(f"v' has no zero on [{x0}, {x1}] for lam={lam}", traj)
    sigma = _critical_sign(lam, v0, dv0)
    lo, hi = float(traj.x[-2]), float(traj.x[-1])
    while abs(hi - lo) > xtol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if sigma * traj(mid)[1] > 0:
            lo = mid
        else:
            hi = mid
    b = 0.5 * (lo + hi)
    out = traj.truncate(b, drift)
    return b, float(out.v[-1]), out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


def weighted_flux_residual(traj: Trajectory, weight: Callable[[float], float]) -> np.ndarray:
    """``lam * int_{x0}^{x} rho v + rho(x) v'(x) - rho(x0) v'(x0)`` at every sample.

    Since ``(rho v')' = -lam rho v`` the residual vanishes identically for an exact
    solution.  The integral is accumulated step by step with 6-point Gauss-Legendre
    on the dense output, so the check also exercises the interpolant.
    """
    x = traj.x
    if len(x) < 2:
        return np.zeros(len(x))
    lo, hi = x[:-1], x[1:]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_NODES[None, :]
    v, _ = traj(nodes.ravel())
    rho = np.array([weight(t) for t in nodes.ravel()])
    pieces = (rho * v).reshape(nodes.shape) @ _GL_WEIGHTS * half
    integral = np.concatenate(([0.0], np.cumsum(pieces)))
    flux = np.array([weight(t) for t in x]) * traj.dv
    return traj.lam * integral + flux - flux[0]
