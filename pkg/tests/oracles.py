"""Independent reference implementations used only to check the library.

These deliberately avoid the code paths they validate: assignment by
exhaustive permutation search, gradients by central finite differences,
and normal tails by hand-summed error-function series.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def brute_force_assignment(cost: np.ndarray) -> tuple[float, tuple[int, ...]]:
    """Exhaustive minimum-cost assignment; totals summed in row order."""
    cost = np.asarray(cost, dtype=np.float64)
    n = cost.shape[0]
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    totals = cost[np.arange(n), perms].sum(axis=1)
    best = int(totals.argmin())
    return float(totals[best]), tuple(perms[best])


def central_difference(f, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.ravel()
    xflat = x.ravel()
    for i in range(xflat.size):
        orig = xflat[i]
        xflat[i] = orig + step
        fp = f(x)
        xflat[i] = orig - step
        fm = f(x)
        xflat[i] = orig
        flat[i] = (fp - fm) / (2.0 * step)
    return grad


def _erf_taylor(x: float) -> float:
    """erf by its alternating Taylor series; accurate for |x| <= 3."""
    total = 0.0
    u = x  # x^(2n+1) / n!
    n = 0
    while True:
        contrib = u / (2 * n + 1)
        total += contrib if n % 2 == 0 else -contrib
        n += 1
        u *= x * x / n
        if abs(u) / (2 * n + 1) < 1e-20:
            break
    return 2.0 / math.sqrt(math.pi) * total


def _erfc_asymptotic(x: float) -> float:
    """erfc by its divergent asymptotic series, truncated at the smallest term."""
    s = 1.0
    term = 1.0
    n = 1
    sign = -1.0
    while True:
        nxt = term * (2 * n - 1) / (2.0 * x * x)
        if nxt >= term or nxt < 1e-18:
            break
        term = nxt
        s += sign * term
        sign = -sign
        n += 1
    return math.exp(-x * x) / (x * math.sqrt(math.pi)) * s


def upper_tail_oracle(z: float) -> float:
    """P(X >= z) for a standard normal, from error-function series only."""
    x = abs(z) / math.sqrt(2.0)
    if x <= 3.0:
        tail = 0.5 * (1.0 - _erf_taylor(x))
    else:
        tail = 0.5 * _erfc_asymptotic(x)
    return tail if z >= 0 else 1.0 - tail


def relative_error(analytic: np.ndarray, reference: np.ndarray) -> float:
    """Norm-level relative disagreement between two gradient vectors."""
    a = np.asarray(analytic).ravel()
    r = np.asarray(reference).ravel()
    denom = max(float(np.linalg.norm(a)), float(np.linalg.norm(r)), 1e-12)
    return float(np.linalg.norm(a - r)) / denom
