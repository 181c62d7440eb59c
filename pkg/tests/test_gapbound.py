import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectralgap.errors import DomainError, MethodDisagreement, PreconditionError
from spectralgap.gapbound import (
    Method,
    SpectralResult,
    discretization_hat_lambda,
    hat_lambda,
    lichnerowicz,
    miss_function,
    remark_bound,
    shooting_hat_lambda,
)
from spectralgap.models import CurvatureDimension, SymmetricModel, d_max

# Reference values from scripts/derive_oracles.py: Richardson-extrapolated finite
# volumes on 2048/4096 cells and DOP853 shooting, both outside the tested code paths.
FV4096_K_NEG3_N2_D1P7 = 2.3547980751297746
DOP853_K2_N3_D2 = 3.792365010798613
DOP853_K_NEG1_N2P5_D1 = 9.38801814456608


def test_flat_miss_function():
    model = SymmetricModel(CurvatureDimension(0, 3), 2.0)
    D, count = miss_function(model, math.pi**2 / 4)
    assert D == pytest.approx(0.0, abs=1e-9)
    assert count == 1
    D, count = miss_function(model, 1.0)
    assert D == pytest.approx(-math.sin(2.0), abs=1e-9)


def test_miss_function_near_zero_has_no_sign_change():
    model = SymmetricModel(CurvatureDimension(-1, 3), 2.0)
    D, count = miss_function(model, 1e-8)
    assert count == 0
    assert abs(D) < 1e-6
    with pytest.raises(PreconditionError):
        miss_function(model, 0.0)


@pytest.mark.parametrize("N", [1, 2, 5, 10.5])
def test_closed_form(N):
    res = hat_lambda(CurvatureDimension(0, N), math.pi)
    assert res.lam == 1.0
    assert res.method is Method.CLOSED_FORM


@pytest.mark.parametrize("N", [2, 3, 5])
def test_sphere_endpoint(N):
    res = hat_lambda(CurvatureDimension(N - 1, N), math.pi, method="both")
    assert res.lam == pytest.approx(N, abs=1e-8)


def test_negative_curvature_oracle():
    cd = CurvatureDimension(-3, 2)
    assert hat_lambda(cd, 1.7).lam == pytest.approx(FV4096_K_NEG3_N2_D1P7, abs=1e-8)
    assert discretization_hat_lambda(cd, 1.7).lam == pytest.approx(FV4096_K_NEG3_N2_D1P7, abs=1e-8)


@pytest.mark.parametrize(
    "K, N, d, ref",
    [(2, 3, 2.0, DOP853_K2_N3_D2), (-1, 2.5, 1.0, DOP853_K_NEG1_N2P5_D1)],
)
def test_against_independent_shooting(K, N, d, ref):
    assert hat_lambda(CurvatureDimension(K, N), d).lam == pytest.approx(ref, abs=1e-8)


def test_lichnerowicz_and_remark():
    assert lichnerowicz(CurvatureDimension(2, 3)) == 3
    assert lichnerowicz(CurvatureDimension(4, 2)) == 8
    assert lichnerowicz(CurvatureDimension(6.5, 7.5)) == pytest.approx(7.5)
    with pytest.raises(PreconditionError):
        lichnerowicz(CurvatureDimension(0, 3))
    assert remark_bound(3, math.pi) == pytest.approx(3.0)
    assert remark_bound(2, math.pi / 2) == pytest.approx(4.0)
    assert remark_bound(3, 0.4) == pytest.approx(3 / (1 - math.cos(0.2) ** 3))
    with pytest.raises(PreconditionError):
        remark_bound(3, 4.0)


def test_preconditions():
    with pytest.raises(DomainError):
        hat_lambda(CurvatureDimension(2, 3), 3.2)
    with pytest.raises(DomainError):
        CurvatureDimension(1, 1)
    with pytest.raises(PreconditionError):
        hat_lambda(CurvatureDimension(2, 3), 1.0, tol=0.0)


def test_both_reports_agreement():
    res = hat_lambda(CurvatureDimension(-1, 2.5), 1.0, method=Method.BOTH)
    assert res.method is Method.BOTH
    assert res.diagnostics["agreement"] <= 10 * 1e-9


def test_both_raises_on_disagreement():
    # coarse grids cannot reach a 1e-12 agreement
    with pytest.raises(MethodDisagreement):
        hat_lambda(CurvatureDimension(1, 3), 2.0, tol=1e-12, method="both", grids=(32, 64, 128))


def test_result_invariants():
    res = shooting_hat_lambda(CurvatureDimension(1, 3), 2.5, tol=1e-9)
    assert res.lam > 0 and res.achieved_tol <= 1e-9
    lo, hi = res.diagnostics["bracket"]
    assert lo <= res.lam <= hi
    with pytest.raises(ValueError):
        SpectralResult(-1.0, Method.SHOOTING, 0.0)


def test_order_warning_on_low_exponent():
    # weight cos**0.5 vanishing at both ends degrades the scheme below order 2
    cd = CurvatureDimension(2, 1.5)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = discretization_hat_lambda(cd, d_max(cd))
    assert any("observed discretization order" in str(w.message) for w in caught)
    assert res.lam == pytest.approx(6.0, abs=1e-3)
    assert shooting_hat_lambda(cd, d_max(cd)).lam == pytest.approx(6.0, abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(K=st.floats(-3, 3), N=st.floats(1.5, 6), t=st.floats(0.15, 0.95))
def test_continuity_in_K(K, N, t):
    base = CurvatureDimension(K, N)
    d = t * min(d_max(CurvatureDimension(3.1, N)), 3.0)
    lam = hat_lambda(base, d).lam
    diffs = [abs(hat_lambda(CurvatureDimension(K + eps, N), d).lam - lam) for eps in (1e-2, 1e-3, 1e-4)]
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] < 1e-3 * max(1.0, lam)


@settings(max_examples=10, deadline=None)
@given(N=st.floats(1.5, 6), d=st.floats(0.3, 3.0))
def test_monotone_in_K(N, d):
    values = [hat_lambda(CurvatureDimension(K, N), d).lam
              for K in (-2.0, -1.0, 0.0, 0.5, 1.0)
              if d <= d_max(CurvatureDimension(K, N))]
    assert all(b >= a - 1e-8 for a, b in zip(values, values[1:]))


@settings(max_examples=10, deadline=None)
@given(K=st.floats(-4, 4), N=st.floats(1.5, 8))
def test_monotone_in_d(K, N):
    cd = CurvatureDimension(K, N)
    top = min(d_max(cd), 4.0)
    ds = np.linspace(0.2 * top, top, 8)
    lams = [hat_lambda(cd, float(d)).lam for d in ds]
    assert all(a - b > 1e-8 for a, b in zip(lams, lams[1:]))
