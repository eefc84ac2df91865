"""Shortest augmenting path kernel (Kuhn-Munkres with potentials), compiled by numba."""

import numpy as np
from numba import njit


@njit(cache=True)
def shortest_augmenting_path(cost):
    """Min-cost matching of every row of an n x m cost matrix, n <= m.

    Returns (col_owner, u, v) with 1-based bookkeeping: ``col_owner[j]`` is
    the 1-based row matched to column j (1..m), 0 when free. ``u[1:]`` and
    ``v[1:]`` are the row/column potentials. At exit ``v <= 0`` and
    ``v == 0`` on every free column, and every matched edge is tight.
    """
    n, m = cost.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    col_owner = np.zeros(m + 1, np.int64)
    way = np.zeros(m + 1, np.int64)
    minv = np.empty(m + 1)
    used = np.empty(m + 1, np.bool_)
    for i in range(1, n + 1):
        col_owner[0] = i
        j0 = 0
        minv[:] = np.inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = col_owner[j0]
            delta = np.inf
            j1 = -1
            ui0 = u[i0]
            for j in range(1, m + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[col_owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if col_owner[j0] == 0:
                break
        while True:
            j1 = way[j0]
            col_owner[j0] = col_owner[j1]
            j0 = j1
            if j0 == 0:
                break
    return col_owner, u, v
