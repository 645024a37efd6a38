"""Minimum-cost square assignment via shortest augmenting paths.

O(n^3) potential-based variant. The scan order over rows and columns is
fixed, so the returned permutation is deterministic for a given input;
when several permutations share the minimal total cost, only the total is
contract-stable, not the particular permutation.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteError, NonSquareError


def minimum_cost_assignment(cost: np.ndarray) -> list[int]:
    """Return sigma with sigma[i] = column assigned to row i, minimizing total cost.

    The matrix must be square and finite.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise NonSquareError(f"cost matrix has shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise NonFiniteError("cost matrix contains NaN or infinite entries")

    n = cost.shape[0]
    inf = float("inf")
    # 1-based arrays; p[j] is the row matched to column j, column 0 is virtual
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    sigma = [0] * n
    for j in range(1, n + 1):
        sigma[p[j] - 1] = j - 1
    return sigma


def assignment_total(cost: np.ndarray, sigma: list[int]) -> float:
    """Total cost of an assignment, summed in row order."""
    cost = np.asarray(cost, dtype=np.float64)
    n = cost.shape[0]
    return float(cost[np.arange(n), np.asarray(sigma)].sum())
