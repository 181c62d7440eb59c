"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from spectralgap.cli import main
from spectralgap.gapbound import discretization_hat_lambda, hat_lambda, remark_bound, shooting_hat_lambda
from spectralgap.modelfun import (
    check_gradient_comparison,
    check_max_comparison,
    gradient_model_for,
    model_profile,
)
from spectralgap.models import CurvatureDimension, d_max
from spectralgap.spaces import CATALOG, catalog, verify_bound
from spectralgap.tridiag_eigen import assemble_neumann, eigenvalue_k

TOL = 1e-9


def test_01_flat_closed_form(record):
    start = time.perf_counter()
    worst = 0.0
    for N in (1, 2, 3.5, 10):
        for d in (0.5, 1.0, math.pi):
            worst = max(worst, abs(hat_lambda(CurvatureDimension(0, N), d).lam - math.pi**2 / d**2))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1.0
    record(1, ok, f"flat closed form, max error {worst:.1e}, {elapsed:.3f} s")
    assert ok


def test_02_sphere_endpoint(record):
    start = time.perf_counter()
    errors = []
    for N in (2, 3, 5):
        cd = CurvatureDimension(N - 1, N)
        s = shooting_hat_lambda(cd, math.pi).lam
        g = discretization_hat_lambda(cd, math.pi).lam
        errors += [abs(s - N), abs(g - N)]
    elapsed = time.perf_counter() - start
    ok = max(errors) <= 1e-5 and elapsed < 5.0
    record(2, ok, f"lambda_hat(N-1, N, pi) = N, max error {max(errors):.1e} (both methods), {elapsed:.2f} s")
    assert ok


def test_03_remark_inequality(record):
    ds = np.linspace(0.2, math.pi, 13)[1:]
    worst = math.inf
    for N in (2, 3, 5):
        cd = CurvatureDimension(N - 1, N)
        for d in ds:
            worst = min(worst, hat_lambda(cd, float(d)).lam - remark_bound(N, float(d)))
    ok = worst >= -1e-8
    record(3, ok, f"lambda_hat - N/(1-cos^N(d/2)) >= {worst:.3e} on 36 points")
    assert ok


def test_04_monotone_in_d(record):
    violations = 0
    combos = [(K, N) for K in (-2.0, 0.0, 1.5) for N in (2.0, 3.0, 5.0)]
    for K, N in combos:
        cd = CurvatureDimension(K, N)
        top = min(d_max(cd), 3.5)
        lams = [hat_lambda(cd, float(d), TOL).lam for d in np.linspace(0.25 * top, top, 8)]
        violations += sum(not (a - b > 10 * TOL) for a, b in zip(lams, lams[1:]))
    ok = violations == 0
    record(4, ok, f"{violations} monotonicity violations over {len(combos)} (K, N) pairs x 8 d values")
    assert ok


def test_05_dual_method_agreement(record):
    start = time.perf_counter()
    worst = 0.0
    for K in (-2.0, 0.0, 1.0):
        for N in (2.0, 3.5, 6.0):
            for d in (0.8, 1.6, 2.4):
                cd = CurvatureDimension(K, N)
                s = shooting_hat_lambda(cd, d, TOL).lam
                g = discretization_hat_lambda(cd, d).lam
                worst = max(worst, abs(s - g))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and elapsed < 30.0
    record(5, ok, f"27-point grid, max |shooting - extrapolated FV| = {worst:.1e}, {elapsed:.1f} s")
    assert ok


PROFILES = [(l - 1.0, float(l), float(l)) for l in (2, 3, 4)] + [(0.0, 3.0, lam) for lam in (0.5, 1.0, 4.0)]


def test_06_model_closed_forms(record):
    sine = [model_profile(*args) for args in PROFILES[:3]]
    sine_err = max(max(abs(p.b - math.pi / 2), abs(p.m - 1.0)) for p in sine)
    power = [model_profile(*args) for args in PROFILES[3:]]
    b_err = max(abs(p.b * math.sqrt(p.lam) - 4.4934095) for p in power)
    m_err = max(abs(p.m - 0.21723) for p in power)
    spread = max(p.m for p in power) - min(p.m for p in power)
    ok = sine_err <= 1e-8 and b_err <= 1e-6 and m_err <= 1e-5 and spread <= 1e-8
    record(6, ok, f"sine (b, m) error {sine_err:.1e}; power b*sqrt(lam) error {b_err:.1e}, "
                  f"m error {m_err:.1e}, m spread {spread:.1e}")
    assert ok


def test_07_weighted_flux_identity(record):
    extra = [(-2.0, 3.0, 5.0), (2.0, 3.0, 4.0), (1.0, 2.5, 3.0), (-1.0, 1.5, 2.0), (0.0, 6.0, 2.0)]
    worst = max(model_profile(*args).flux_residual() for args in PROFILES + extra)
    ok = worst <= 1e-6
    record(7, ok, f"max |lam int rho v + rho v'| = {worst:.1e} over {len(PROFILES) + len(extra)} profiles")
    assert ok


def test_08_bound_on_catalog(record):
    fails, worst_eq = [], 0.0
    for e in CATALOG:
        rep = verify_bound(e.space, 1e-5, e.name)
        if rep.margin < -1e-5:
            fails.append(e.name)
        if e.equality:
            worst_eq = max(worst_eq, abs(rep.margin))
    ok = not fails and worst_eq <= 1e-5
    record(8, ok, f"{len(CATALOG)} spaces, failures {fails}, max equality |margin| {worst_eq:.1e}")
    assert ok


GRADIENT_CASES = ["cos2-sym", "cos4-sym", "cos1-asym", "cos3-asym"]


def test_09_gradient_comparison(record):
    details, ok = [], True
    for name in GRADIENT_CASES:
        (entry,) = catalog([name])
        reps = []
        for n in (1024, 2048):
            reps.append(check_gradient_comparison(entry.space, gradient_model_for(entry.space, n=n), n=n))
        coarse, fine = reps
        bound_ok = coarse.max_violation <= 1e-4 * (1 + coarse.max_gamma)
        if coarse.max_violation > 0:
            ratio = coarse.max_violation / max(fine.max_violation, 1e-300)
            refine_ok = ratio >= 3.0
        else:
            ratio, refine_ok = math.inf, True
        ok = ok and bound_ok and refine_ok
        details.append(f"{name} {coarse.max_violation:.1e} (x{ratio:.2f})")
    record(9, ok, "; ".join(details))
    assert ok


def test_10_max_comparison(record):
    entries = [e for e in CATALOG if "weighted" in e.tags]
    reps = {e.name: check_max_comparison(e.space, 1e-4) for e in entries}
    asym = sum("asymmetric" in e.tags for e in entries)
    worst = min(r.max_f - r.m for r in reps.values())
    ok = all(r.passed for r in reps.values()) and len(entries) == 6 and asym >= 2
    record(10, ok, f"{len(entries)} weighted intervals ({asym} asymmetric), min(max f - m) = {worst:.1e}")
    assert ok


def test_11_discrete_cosine(record):
    worst = 0.0
    for n in (4, 16, 64):
        pencil = assemble_neumann(lambda x: 1.0, (0.0, 1.0), n)
        for k in (0, 1, 2):
            exact = 4 * n * n * math.sin(k * math.pi / (2 * n)) ** 2
            worst = max(worst, abs(eigenvalue_k(pencil, k) - exact))
    ok = worst <= 1e-12
    record(11, ok, f"flat pencil vs (4/h^2) sin^2(k pi/2n), max error {worst:.1e}")
    assert ok


def test_12_cli_determinism(record, tmp_path):
    grid = ["sweep", "--K=-1,0,0.5,1", "--N", "2,2.5,3,4,5", "--d", "0.4:2.4:5"]
    outputs = []
    for jobs in (1, 1, 8, 8):
        path = tmp_path / f"sweep-{len(outputs)}.csv"
        assert main(grid + ["--jobs", str(jobs), "--out", str(path)]) == 0
        outputs.append(path.read_bytes())
    rows = sum(1 for ln in outputs[0].decode().splitlines() if ln and not ln.startswith("#")) - 1
    ok = rows == 100 and all(o == outputs[0] for o in outputs)
    record(12, ok, f"{rows}-point sweep byte-identical at jobs 1 and 8")
    assert ok
