import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectralgap.errors import PreconditionError
from spectralgap.gapbound import hat_lambda
from spectralgap.models import CurvatureDimension
from spectralgap.spaces import (
    CATALOG,
    Circle,
    FlatInterval,
    Rectangle,
    Sphere,
    WeightedInterval,
    bg_ratio_lower_bound,
    catalog,
    first_neumann_eigenpair,
    s_kappa,
    verify_bound,
)


def test_closed_form_spaces():
    assert (Circle(2 * math.pi).diameter, Circle(2 * math.pi).lambda1) == (math.pi, 1.0)
    s = Sphere(3)
    assert (s.K, s.N, s.diameter, s.lambda1) == (2.0, 3.0, math.pi, 3.0)
    r = Rectangle(1.0, 2.0)
    assert r.diameter == pytest.approx(math.sqrt(5))
    assert r.lambda1 == pytest.approx(math.pi**2 / 4)
    w = WeightedInterval(-1.0, 1.0, 2)
    assert (w.K, w.N, w.diameter) == (2.0, 3.0, 2.0)
    with pytest.raises(PreconditionError):
        Sphere(1)
    with pytest.raises(PreconditionError):
        WeightedInterval(-2.0, 1.0, 2)


def test_verify_examples():
    rep = verify_bound(Sphere(2))
    assert rep.lambda1 == 2 and rep.margin == pytest.approx(0.0, abs=1e-8) and rep.passed
    rep = verify_bound(Circle(2 * math.pi))
    assert rep.margin == 0.0
    rep = verify_bound(Rectangle(1.0, 2.0))
    assert rep.margin == pytest.approx(math.pi**2 / 4 - math.pi**2 / 5, abs=1e-9)


def test_first_eigenpair_examples():
    flat = first_neumann_eigenpair(FlatInterval(math.pi), 1024)
    assert flat.lam == pytest.approx(1.0, abs=1e-4)
    assert flat.f.min() == pytest.approx(-1.0)
    near_full = first_neumann_eigenpair(WeightedInterval(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3, 2), 2048)
    assert near_full.lam == pytest.approx(3.0, abs=2e-3)
    short = first_neumann_eigenpair(WeightedInterval(-0.5, 0.5, 2), 1024)
    assert short.lam > hat_lambda(CurvatureDimension(2, 3), 1.0).lam - 1e-6
    with pytest.raises(PreconditionError):
        first_neumann_eigenpair(FlatInterval(1.0), 32)


def test_s_kappa():
    assert s_kappa(0.0, 2.5) == 2.5
    assert s_kappa(1.0, math.pi / 2) == pytest.approx(1.0)
    assert s_kappa(-1.0, 1.0) == pytest.approx(math.sinh(1.0))
    with pytest.raises(PreconditionError):
        s_kappa(1.0, -0.1)


@pytest.mark.parametrize("eps", [1e-6, -1e-6])
@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_s_kappa_continuous_at_zero(eps, theta):
    assert abs(s_kappa(eps, theta) - theta) <= abs(eps) * theta**3 / 6 * (1 + 1e-3)


def test_bishop_gromov_values():
    assert bg_ratio_lower_bound(CurvatureDimension(0, 3), 1.0, 2.0) == pytest.approx(0.125, rel=1e-10)
    expected = (math.pi / 8 - 0.25) / (math.pi / 4)
    assert bg_ratio_lower_bound(CurvatureDimension(2, 3), math.pi / 4, math.pi / 2) == pytest.approx(
        expected, rel=1e-10
    )
    assert bg_ratio_lower_bound(CurvatureDimension(-1, 4), 2.0 - 1e-9, 2.0) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(PreconditionError):
        bg_ratio_lower_bound(CurvatureDimension(2, 3), 1.0, 4.0)


@settings(max_examples=40, deadline=None)
@given(K=st.floats(-3, 3), N=st.floats(1.5, 6), r=st.floats(0.05, 0.9), R=st.floats(0.1, 1.0))
def test_bishop_gromov_monotone(K, N, r, R):
    cd = CurvatureDimension(K, N)
    Rmax = min(3.0, math.pi * math.sqrt((N - 1) / K)) if K > 0 else 3.0
    R1, R2 = R * Rmax * 0.5, R * Rmax
    r1 = r * R1
    a = bg_ratio_lower_bound(cd, r1, R1)
    b = bg_ratio_lower_bound(cd, r1, R2)
    assert 0 < b <= a + 1e-12 <= 1 + 1e-12


def test_catalog_shape():
    kinds = [type(e.space).__name__ for e in CATALOG]
    assert kinds.count("Circle") == 3 and kinds.count("Sphere") == 3
    assert kinds.count("Rectangle") == 3 and kinds.count("FlatInterval") == 3
    assert kinds.count("WeightedInterval") == 6
    assert {e.space.n for e in CATALOG if isinstance(e.space, Sphere)} == {2, 3, 5}
    assert len(catalog(["asym"])) == 3
    assert catalog(["no-such-space"]) == []
    assert all(e.equality for e in catalog(equality_only=True))


@pytest.mark.parametrize("entry", CATALOG, ids=lambda e: e.name)
def test_catalog_bound(entry):
    rep = verify_bound(entry.space, 1e-5, entry.name)
    assert rep.passed
    if entry.equality:
        assert abs(rep.margin) <= 1e-5


@settings(max_examples=8, deadline=None)
@given(x0=st.floats(-1.5, 0.0), width=st.floats(0.3, 1.5), p=st.sampled_from([1.0, 2.0, 3.0]))
def test_random_weighted_intervals_respect_bound(x0, width, p):
    x1 = min(x0 + width, math.pi / 2)
    rep = verify_bound(WeightedInterval(x0, x1, p), 1e-5, n=512)
    assert rep.passed, rep
