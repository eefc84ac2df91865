"""
Exact rectangular linear assignment.

``solve`` matches every row (when rows <= cols) or every column (otherwise)
and returns an optimal matching for the requested sense. Among several
optimal matchings it returns the lexicographically smallest pair sequence
(pairs sorted by row, then column).

The default method is the shortest-augmenting-path algorithm, which is exact
on floating point weights and leaves dual potentials behind. The set of
optimal matchings is exactly the set of valid matchings that use only tight
edges, so ties are resolved by a greedy pass over the tight subgraph.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._kernel import shortest_augmenting_path


class Sense(str, Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


@dataclass
class WeightMatrix:
    weights: np.ndarray
    sense: Sense = Sense.MINIMIZE
    row_ids: Optional[Sequence[int]] = None
    col_ids: Optional[Sequence[int]] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2:
            if w.size == 0:
                w = w.reshape(len(self.row_ids or ()), len(self.col_ids or ()))
            else:
                raise ValueError(f"weights must be 2-D, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        self.weights = w
        self.sense = Sense(self.sense)
        n, m = w.shape
        self.row_ids = list(range(n)) if self.row_ids is None else list(self.row_ids)
        self.col_ids = list(range(m)) if self.col_ids is None else list(self.col_ids)
        if len(self.row_ids) != n or len(self.col_ids) != m:
            raise ValueError("row/col id lists do not match the weight shape")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.weights.shape


@dataclass
class Matching:
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    total: float = 0.0

    def as_dict(self) -> Dict[int, int]:
        return dict(self.pairs)


def _minimize_form(m: WeightMatrix) -> np.ndarray:
    return m.weights if m.sense is Sense.MINIMIZE else -m.weights


def _to_matching(m: WeightMatrix, idx_pairs: List[Tuple[int, int]]) -> Matching:
    idx_pairs = sorted(idx_pairs)
    total = math.fsum(float(m.weights[r, c]) for r, c in idx_pairs)
    pairs = [(m.row_ids[r], m.col_ids[c]) for r, c in idx_pairs]
    return Matching(pairs=pairs, total=total)


def solve(m: WeightMatrix, method: str = "sap") -> Matching:
    """Optimal matching of size min(rows, cols).

    method="sap" (default) is exact and applies the lexicographic tie-break.
    method="auction" runs epsilon-scaling auction on weights quantised to
    ``1e-6``; it is exact for integer weights but leaves ties unresolved.
    """
    n, k = m.shape
    if n == 0 or k == 0:
        return Matching()
    cost = _minimize_form(m)
    transposed = n > k
    if transposed:
        cost = cost.T
    if method == "auction":
        from .auction import auction_rows

        row_to_col = auction_rows(cost)
    elif method == "sap":
        row_to_col = _sap_lex(np.ascontiguousarray(cost), by_rows=not transposed)
    else:
        raise ValueError(f"unknown method {method!r}")
    idx = [(c, r) if transposed else (r, c) for r, c in enumerate(row_to_col)]
    return _to_matching(m, idx)


def _sap_lex(cost: np.ndarray, by_rows: bool) -> List[int]:
    shift = cost.min()
    work = cost - shift
    col_owner, u, v = shortest_augmenting_path(work)
    n, m = work.shape
    row_to_col = [0] * n
    for j in range(1, m + 1):
        if col_owner[j]:
            row_to_col[col_owner[j] - 1] = j - 1
    scale = float(np.abs(work).max())
    tol = 1e-10 * scale
    reduced = work - u[1:, None] - v[None, 1:]
    tight = reduced <= tol
    n_tight = int(np.count_nonzero(tight))
    required = v[1:] < -tol
    if n_tight == n:
        return row_to_col
    return _lex_refine(tight, required, row_to_col, by_rows)


_DUMMY = -1


class _Refiner:
    """Greedy lexicographic selection among valid matchings of a tight graph.

    Valid = every row matched and every `required` column covered. Free
    columns are thought of as held by interchangeable dummy rows that may
    sit on any non-required column.
    """

    def __init__(self, tight: np.ndarray, required: np.ndarray, row_to_col: List[int]):
        n, m = tight.shape
        self.n, self.m = n, m
        rr, cc = np.nonzero(tight)
        self.row_adj: List[List[int]] = [[] for _ in range(n)]
        self.col_adj: List[List[int]] = [[] for _ in range(m)]
        for r, c in zip(rr.tolist(), cc.tolist()):
            self.row_adj[r].append(c)
            self.col_adj[c].append(r)
        self.optional_cols = np.flatnonzero(~required).tolist()
        self.required = required
        self.mr = list(row_to_col)
        self.mc = [_DUMMY] * m
        for r, c in enumerate(self.mr):
            self.mc[c] = r
        self.row_locked = [False] * n
        self.col_locked = [False] * m

    def try_move(self, r: int, c: int) -> bool:
        """Rematch row r to column c if an alternating cycle allows it."""
        target = self.mr[r]
        start = self.mc[c]
        taker: Dict[int, int] = {}      # column -> node that takes it
        came_from: Dict[int, int] = {}  # node -> column it gets pushed out of
        came_from[start] = c
        seen = {start}
        queue = deque([start])
        found = False
        while queue and not found:
            node = queue.popleft()
            cols = self.optional_cols if node == _DUMMY else self.row_adj[node]
            for y in cols:
                if y == c or self.col_locked[y] or y in taker:
                    continue
                if y == target:
                    taker[y] = node
                    found = True
                    break
                owner = self.mc[y]
                if owner != _DUMMY and self.row_locked[owner]:
                    continue
                if owner in seen:
                    continue
                taker[y] = node
                seen.add(owner)
                came_from[owner] = y
                queue.append(owner)
        if not found:
            return False
        y = target
        while True:
            node = taker[y]
            if node == _DUMMY:
                self.mc[y] = _DUMMY
            else:
                self.mc[y] = node
                self.mr[node] = y
            y = came_from[node]
            if y == c:
                break
        self.mr[r] = c
        self.mc[c] = r
        return True

    def by_rows(self) -> List[int]:
        for r in range(self.n):
            for c in self.row_adj[r]:
                if c >= self.mr[r]:
                    break
                if self.col_locked[c]:
                    continue
                if self.try_move(r, c):
                    break
            self.row_locked[r] = True
            self.col_locked[self.mr[r]] = True
        return self.mr

    def by_cols(self) -> List[int]:
        for c in range(self.m):
            for r in self.col_adj[c]:
                owner = self.mc[c]
                if owner != _DUMMY and r >= owner:
                    break
                if self.row_locked[r]:
                    continue
                if self.try_move(r, c):
                    break
            self.col_locked[c] = True
            if self.mc[c] != _DUMMY:
                self.row_locked[self.mc[c]] = True
        return self.mr


def _lex_refine(tight, required, row_to_col, by_rows: bool) -> List[int]:
    refiner = _Refiner(tight, required, row_to_col)
    return refiner.by_rows() if by_rows else refiner.by_cols()
