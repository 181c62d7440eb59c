import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectralgap.errors import IntegrationError, NoCriticalPointError, PreconditionError
from spectralgap.models import Endpoint, EndpointKind, frobenius_start, series_offset
from spectralgap.ode_ivp import (
    IntegratorConfig,
    first_critical_point,
    integrate_eigen_ode,
    weighted_flux_residual,
)


def zero(x):
    return 0.0


def test_cosine_end_value():
    traj = integrate_eigen_ode(zero, 1.0, 0.0, 1.0, 0.0, 10.0)
    assert traj.status == "reached_end"
    assert traj.v[-1] == pytest.approx(math.cos(10.0), abs=1e-9)
    assert traj.dv[-1] == pytest.approx(-math.sin(10.0), abs=1e-9)


def test_linear_solution_at_zero_lambda():
    traj = integrate_eigen_ode(zero, 0.0, 0.0, 1.0, 2.0, 2.0)
    assert (traj.v[-1], traj.dv[-1]) == pytest.approx((5.0, 2.0), abs=1e-12)


def test_backward_integration():
    traj = integrate_eigen_ode(zero, 4.0, 1.0, 1.0, 0.0, -1.0)
    assert traj.v[-1] == pytest.approx(math.cos(4.0), abs=1e-9)


def test_dense_output_accuracy():
    traj = integrate_eigen_ode(zero, 9.0, 0.0, 0.0, 3.0, 2.0)
    xq = np.linspace(0.0, 2.0, 301)
    v, dv = traj(xq)
    assert np.max(np.abs(v - np.sin(3 * xq))) < 1e-8
    assert np.max(np.abs(dv - 3 * np.cos(3 * xq))) < 1e-7
    with pytest.raises(PreconditionError):
        traj(2.5)


def test_singular_start_reaches_regular_zero():
    # K=2, N=3: v'' - 2 tan(x) v' = -3 v has the bounded solution sin(x) from -pi/2
    end = Endpoint(-math.pi / 2, +1, EndpointKind.SINGULAR, 2.0, 1.0)
    h = series_offset(end, 3.0, math.pi)
    v0, dv0 = frobenius_start(end, 3.0, -1.0, h)
    traj = integrate_eigen_ode(lambda x: 2 * math.tan(x), 3.0, end.position + h, v0, dv0, 0.0)
    assert traj.v[-1] == pytest.approx(0.0, abs=1e-9)
    assert traj.dv[-1] == pytest.approx(1.0, abs=1e-9)


def test_first_critical_point():
    b, vb, traj = first_critical_point(zero, 4.0, 0.0, 0.0, 1.0, 5.0)
    assert b == pytest.approx(math.pi / 4, abs=1e-11)
    assert vb == pytest.approx(0.5, abs=1e-10)
    assert traj.x[-1] == b
    with pytest.raises(NoCriticalPointError) as info:
        first_critical_point(zero, 4.0, 0.0, 0.0, 1.0, 0.5)
    assert info.value.trajectory is not None


def test_step_limit_raises():
    with pytest.raises(IntegrationError):
        integrate_eigen_ode(zero, 1e4, 0.0, 1.0, 0.0, 50.0, IntegratorConfig(max_steps=20))


def test_config_validation():
    with pytest.raises(PreconditionError):
        IntegratorConfig(rel_tol=0.5)
    with pytest.raises(PreconditionError):
        IntegratorConfig(abs_tol=0.0)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.1, 30.0), span=st.floats(0.5, 4.0))
def test_flux_identity_holds_for_tangent_drift(lam, span):
    # weight cos(x)**3 on a regular stretch of (-pi/2, pi/2)
    x0 = -0.5 * min(span, 2.5)
    traj = integrate_eigen_ode(lambda x: 3 * math.tan(x), lam, x0, 1.0, 0.3, -x0)
    res = weighted_flux_residual(traj, lambda x: math.cos(x) ** 3)
    assert np.max(np.abs(res)) < 1e-6 * max(1.0, lam)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.1, 50.0), x1=st.floats(0.1, 6.0))
def test_matches_closed_form_cosine(lam, x1):
    traj = integrate_eigen_ode(zero, lam, 0.0, 1.0, 0.0, x1)
    k = math.sqrt(lam)
    assert traj.v[-1] == pytest.approx(math.cos(k * x1), abs=1e-8)
