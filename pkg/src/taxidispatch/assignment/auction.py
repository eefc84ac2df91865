"""Forward auction with epsilon scaling on integer-quantised benefits."""

from __future__ import annotations

from collections import deque
from typing import List

import numpy as np

QUANTUM = 1e-6


def auction_rows(cost: np.ndarray, quantum: float = QUANTUM) -> List[int]:
    """Assign every row of an n x m cost matrix (n <= m); returns row -> column.

    Costs are rounded to multiples of `quantum` and turned into integer
    benefits scaled by (m + 1); running epsilon down to 1 then gives an
    assignment that is optimal for the quantised costs. Rows are padded with
    zero-benefit dummies so that every column is owned at the end.
    """
    n, m = cost.shape
    benefit = -np.rint(cost / quantum).astype(np.int64)
    benefit = benefit - benefit.min()
    benefit *= m + 1
    if n < m:
        benefit = np.vstack([benefit, np.zeros((m - n, m), dtype=np.int64)])
    size = m
    if size == 1:
        return [0]
    prices = np.zeros(size, dtype=np.int64)
    owner = np.full(size, -1, dtype=np.int64)
    row_col = np.full(size, -1, dtype=np.int64)
    eps = max(1, int(benefit.max()) // 4)
    while True:
        owner[:] = -1
        row_col[:] = -1
        queue = deque(range(size))
        while queue:
            i = queue.popleft()
            values = benefit[i] - prices
            j1 = int(np.argmax(values))
            best = values[j1]
            values[j1] = np.iinfo(np.int64).min
            second = values.max()
            prices[j1] += best - second + eps
            prev = owner[j1]
            if prev >= 0:
                row_col[prev] = -1
                queue.append(int(prev))
            owner[j1] = i
            row_col[i] = j1
        if eps == 1:
            break
        eps = max(1, eps // 4)
    return [int(c) for c in row_col[:n]]
