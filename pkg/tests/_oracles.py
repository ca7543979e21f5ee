"""Independent reference computations used by the tests.

Everything here is deliberately written against the defining equations, not
against the library code paths it checks.
"""

import math

import numpy as np


def bisect_wavenumber(k, iterations=200):
    """k-th root of 1 + cos(x)*cosh(x) = 0 by plain bisection on ((k-1)pi, k pi)."""
    f = lambda x: 1.0 + math.cos(x) * math.cosh(x)
    lo, hi = (k - 1) * math.pi + 1e-9, k * math.pi
    flo = f(lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def char_poly_roots(a):
    """Eigenvalues via Faddeev-LeVerrier characteristic coefficients + np.roots."""
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.eye(n)
    for k in range(1, n + 1):
        am = a @ m
        c = -np.trace(am) / k
        coeffs[k] = c
        m = am + c * np.eye(n)
    return np.roots(coeffs)


def match_spectra(values_a, values_b):
    """Greedy nearest matching; returns the worst distance over max magnitude."""
    values_a = np.asarray(values_a, dtype=complex)
    pool = list(np.asarray(values_b, dtype=complex))
    scale = max(np.max(np.abs(values_a)), np.max(np.abs(values_b)), 1e-300)
    worst = 0.0
    for lam in values_a:
        dists = [abs(lam - other) for other in pool]
        j = int(np.argmin(dists))
        worst = max(worst, dists[j] / scale)
        pool.pop(j)
    return worst


def grid_search(objective, r_values, l_values):
    """Dense evaluation of objective(r, l); returns (best_value, r, l)."""
    best = (-np.inf, None, None)
    for r in r_values:
        for l in l_values:
            val = objective(r, l)
            if val > best[0]:
                best = (val, r, l)
    return best
