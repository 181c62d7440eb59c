"""Independent reference values for the frozen test oracles.

Uses scipy's DOP853 (not the package integrator) for shooting and a fine
finite-volume grid pair for the eigenvalue, so the frozen numbers do not come
from the code paths they test.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from spectralgap.tridiag_eigen import assemble_neumann, eigenvalue_k


def drift(K, N):
    L = K / (N - 1)
    if L > 0:
        r = math.sqrt(L)
        return lambda x: (N - 1) * r * math.tan(r * x)
    r = math.sqrt(-L)
    return lambda x: -(N - 1) * r * math.tanh(r * x)


def weight(K, N):
    L = K / (N - 1)
    if L > 0:
        return lambda x: math.cos(math.sqrt(L) * x) ** (N - 1)
    return lambda x: math.cosh(math.sqrt(-L) * x) ** (N - 1)


def neumann_miss(K, N, d, lam):
    c = drift(K, N)
    sol = solve_ivp(lambda x, y: [y[1], c(x) * y[1] - lam * y[0]], (-d / 2, d / 2), [1.0, 0.0],
                    method="DOP853", rtol=1e-13, atol=1e-15)
    return sol.y[1, -1]


def shooting_oracle(K, N, d, lo, hi):
    return brentq(lambda lam: neumann_miss(K, N, d, lam), lo, hi, xtol=1e-14)


def fv_oracle(K, N, d, n=4096):
    w = weight(K, N)
    vals = [eigenvalue_k(assemble_neumann(w, (-d / 2, d / 2), m), 1, 1e-13) for m in (n // 2, n)]
    return vals[1] + (vals[1] - vals[0]) / 3


def one_sided_power(l):
    """b*sqrt(lam) and m for the R = 0 model: v = -Gamma-normalized Bessel profile."""
    from scipy.special import gamma, jn_zeros, jv

    nu = (l - 2) / 2
    prof = lambda t: -gamma(nu + 1) * (2 / t) ** nu * jv(nu, t) if t > 0 else -1.0  # noqa: E731
    # critical point: derivative of t^{-nu} J_nu(t) is -t^{-nu} J_{nu+1}(t)
    if float(nu).is_integer():
        b = jn_zeros(int(nu) + 1, 1)[0]
    else:
        t = np.linspace(0.5, 10.0, 2000)
        i = int(np.argmax(np.sign(jv(nu + 1, t[1:])) != np.sign(jv(nu + 1, t[:-1]))))
        b = brentq(lambda s: jv(nu + 1, s), t[i], t[i + 1], xtol=1e-15)
    return b, prof(b)


if __name__ == "__main__":
    for K, N, d, lo, hi in [(-3, 2, 1.7, 1.0, 4.0), (2, 3, 2.0, 3.2, 5.0), (-1, 2.5, 1.0, 5.0, 15.0)]:
        s = shooting_oracle(K, N, d, lo, hi)
        f = fv_oracle(K, N, d)
        print(f"hat({K}, {N}, {d}): DOP853 {s!r}  FV4096 {f!r}  diff {s - f:.2e}")
    for l in (3, 4, 2.5):
        b, m = one_sided_power(l)
        print(f"power model l={l}: b*sqrt(lam)={b!r} m={m!r}")
