"""Exhaustive reference solver used to check `solve` on small matrices."""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .solver import Matching, Sense, WeightMatrix

MAX_SIDE = 9


def brute_force(m: WeightMatrix) -> Matching:
    """Enumerate every injective matching of size min(rows, cols).

    Optimal total first; ties go to the lexicographically smallest pair
    sequence, the same rule `solve` follows.
    """
    n, k = m.shape
    if min(n, k) > MAX_SIDE:
        raise ValueError(f"brute force refuses min(rows, cols) = {min(n, k)} > {MAX_SIDE}")
    if n == 0 or k == 0:
        return Matching()
    w = m.weights if m.sense is Sense.MINIMIZE else -m.weights
    if n <= k:
        # each candidate lists the column of row 0, 1, ...; lex order of the
        # permutations is the lex order of the pair sequences
        cand = _permutations(k, n)
        totals = w[np.arange(n), cand].sum(axis=1)
        best = _first_optimal(totals, w)
        idx = [(r, int(c)) for r, c in enumerate(cand[best])]
    else:
        # each candidate lists the row of column 0, 1, ...
        cand = _permutations(n, k)
        totals = w[cand, np.arange(k)].sum(axis=1)
        tied = _optimal_set(totals, w)
        keys = [tuple(sorted((int(r), c) for c, r in enumerate(cand[i]))) for i in tied]
        idx = list(min(keys))
    total = math.fsum(float(m.weights[r, c]) for r, c in idx)
    return Matching(pairs=[(m.row_ids[r], m.col_ids[c]) for r, c in sorted(idx)], total=total)


@lru_cache(maxsize=32)
def _permutations(pool: int, length: int) -> np.ndarray:
    out = np.array(list(itertools.permutations(range(pool), length)), dtype=np.int64)
    out.setflags(write=False)
    return out


def _tolerance(w: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.abs(w).max())) * max(w.shape)


def _optimal_set(totals: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.flatnonzero(totals <= totals.min() + _tolerance(w))


def _first_optimal(totals: np.ndarray, w: np.ndarray) -> int:
    return int(_optimal_set(totals, w)[0])
