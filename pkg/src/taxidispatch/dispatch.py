"""
Dispatch strategies.

Every strategy reads a `DispatchContext` snapshot and returns the complete
new assignment (kept pairs included). FCFS and NTNR only add pairs; FA
re-solves everything without paying anyone; the compensated strategies run
NTNR first and then propose a reassignment among dispatched taxis that the
mediator pays for out of its accumulated balance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .assignment import Sense, WeightMatrix, solve
from .economics import (
    MediatorLedger,
    ServiceQuote,
    compensation_matrix,
    ledger_commit_or_rollback,
    ledger_stage,
)
from .fleet import Assignment, Customer, CustomerStatus, TariffScheme, Taxi, TaxiStatus
from .spatial import pairwise_distances, points_xy

# meters per euro: one euro of mediator income is worth this much pickup distance
DEFAULT_GAMMA = 1.0 / 0.00085


@dataclass
class DispatchContext:
    now: float
    taxis: Sequence[Taxi]
    customers: Mapping[int, Customer]
    assignment: Assignment
    tariff: TariffScheme = field(default_factory=TariffScheme)
    dest_known: bool = False

    @cached_property
    def available(self) -> List[int]:
        return [t.id for t in self.taxis if t.status is TaxiStatus.AVAILABLE]

    @cached_property
    def dispatched(self) -> List[int]:
        return [t.id for t in self.taxis if t.status is TaxiStatus.DISPATCHED]

    @cached_property
    def waiting(self) -> List[int]:
        """Unassigned customers, longest waiting first (ties by id)."""
        ws = [c for c in self.customers.values() if c.status is CustomerStatus.UNASSIGNED]
        ws.sort(key=lambda c: (c.request_time, c.id))
        return [c.id for c in ws]

    @cached_property
    def assigned(self) -> List[int]:
        return sorted(c.id for c in self.customers.values() if c.status is CustomerStatus.ASSIGNED)

    @cached_property
    def _positions(self) -> Dict[int, Tuple[float, float]]:
        out = {}
        for t in self.taxis:
            if t.status in (TaxiStatus.AVAILABLE, TaxiStatus.DISPATCHED):
                p = t.position(self.now)
                out[t.id] = (p.x, p.y)
        return out

    def taxi_xy(self, ids: Sequence[int]) -> np.ndarray:
        pos = self._positions
        return np.array([pos[i] for i in ids], dtype=np.float64).reshape(-1, 2)

    def origin_xy(self, ids: Sequence[int]) -> np.ndarray:
        return points_xy(self.customers[i].origin for i in ids)

    def trip_estimates(self, ids: Sequence[int]) -> np.ndarray:
        if not self.dest_known:
            return np.full(len(ids), self.tariff.est_trip)
        return np.array([self.customers[i].trip_length for i in ids], dtype=np.float64)


# --- non-compensated strategies -------------------------------------------------


def fcfs(ctx: DispatchContext) -> Assignment:
    """Longest-waiting customer takes the nearest available taxi, repeatedly."""
    out = ctx.assignment.copy()
    taxis = ctx.available
    if not taxis or not ctx.waiting:
        return out
    xy = ctx.taxi_xy(taxis)
    free = np.ones(len(taxis), dtype=bool)
    left = len(taxis)
    for cid in ctx.waiting:
        if left == 0:
            break
        o = ctx.customers[cid].origin
        d = np.hypot(xy[:, 0] - o.x, xy[:, 1] - o.y)
        d[~free] = np.inf
        j = int(np.argmin(d))  # first minimum = lowest taxi id
        out.add(taxis[j], cid)
        free[j] = False
        left -= 1
    return out


def ntnr(ctx: DispatchContext) -> Assignment:
    """FCFS unless customers outnumber taxis; then globally closest pairs first."""
    taxis = ctx.available
    if len(ctx.waiting) <= len(taxis):
        return fcfs(ctx)
    out = ctx.assignment.copy()
    if not taxis:
        return out
    custs = sorted(ctx.waiting)
    d = pairwise_distances(ctx.taxi_xy(taxis), ctx.origin_xy(custs))
    # stable sort of the row-major ravel: ties fall to lower taxi id, then customer id
    order = np.argsort(d, axis=None, kind="stable")
    m = len(custs)
    used_t = np.zeros(len(taxis), dtype=bool)
    used_c = np.zeros(m, dtype=bool)
    left = len(taxis)
    for flat in order.tolist():
        i, j = divmod(flat, m)
        if used_t[i] or used_c[j]:
            continue
        out.add(taxis[i], custs[j])
        used_t[i] = used_c[j] = True
        left -= 1
        if left == 0:
            break
    return out


def fa(ctx: DispatchContext) -> Assignment:
    """Globally distance-optimal matching of available+dispatched taxis to all open customers."""
    rows = sorted(ctx.available + ctx.dispatched)
    cols = sorted(ctx.waiting + ctx.assigned)
    if not rows or not cols:
        return ctx.assignment.copy()
    w = pairwise_distances(ctx.taxi_xy(rows), ctx.origin_xy(cols))
    matching = solve(WeightMatrix(w, Sense.MINIMIZE, rows, cols))
    return Assignment(matching.pairs)


# --- compensated reassignment ---------------------------------------------------


class ObjectiveKind(str, Enum):
    MIN_DIST = "mindist"
    MAX_REV = "maxrev"
    COMBINED = "combined"


@dataclass(frozen=True)
class Objective:
    kind: ObjectiveKind = ObjectiveKind.MIN_DIST
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        if self.kind is ObjectiveKind.COMBINED and not self.gamma > 0:
            raise ValueError("combined objective needs gamma > 0")


@dataclass(frozen=True)
class Transfer:
    """One taxi moved from customer `old_customer` to `new_customer`."""

    taxi_id: int
    old_customer: int
    new_customer: int
    old_quote: ServiceQuote
    new_quote: ServiceQuote
    amount: float  # compensation paid to the taxi (negative: taxi pays)


@dataclass
class _Problem:
    rows: List[int]
    cols: List[int]
    own_col: np.ndarray  # column index of each row's A^o customer
    pickup: np.ndarray
    trips: np.ndarray
    comp: np.ndarray


def _reassignment_problem(
    ctx: DispatchContext, base: Assignment, allow_displacement: bool
) -> _Problem:
    rows = base.taxis()
    if allow_displacement:
        cols = sorted(set(base.customers()) | set(ctx.waiting))
    else:
        cols = base.customers()
    col_index = {c: j for j, c in enumerate(cols)}
    own_col = np.array([col_index[base.customer_of(t)] for t in rows], dtype=np.int64)
    pickup = pairwise_distances(ctx.taxi_xy(rows), ctx.origin_xy(cols))
    trips = ctx.trip_estimates(cols)
    idx = np.arange(len(rows))
    comp = compensation_matrix(ctx.tariff, pickup[idx, own_col], trips[own_col], pickup, trips)
    comp[idx, own_col] = 0.0
    return _Problem(rows, cols, own_col, pickup, trips, comp)


def _objective_weights(p: _Problem, obj: Objective) -> WeightMatrix:
    if obj.kind is ObjectiveKind.MIN_DIST:
        return WeightMatrix(p.pickup, Sense.MINIMIZE, p.rows, p.cols)
    if obj.kind is ObjectiveKind.MAX_REV:
        return WeightMatrix(-p.comp, Sense.MAXIMIZE, p.rows, p.cols)
    return WeightMatrix(p.pickup + obj.gamma * p.comp, Sense.MINIMIZE, p.rows, p.cols)


def build_objective_matrix(
    ctx: DispatchContext, obj: Objective, base: Assignment, allow_displacement: bool = True
) -> WeightMatrix:
    """Rows: taxis holding a pair in `base`; columns: their customers plus waiting ones.

    MinDist minimises pickup distance, MaxRev maximises mediator income
    (minus the compensation), Combined minimises distance + gamma * compensation.
    """
    return _objective_weights(_reassignment_problem(ctx, base, allow_displacement), obj)


@dataclass
class CompensatedOutcome:
    assignment: Assignment
    ledger: MediatorLedger
    accepted: bool
    proposed: bool = False  # True when the optimum differed from the NTNR baseline
    transfers: List[Transfer] = field(default_factory=list)

    def __iter__(self):
        return iter((self.assignment, self.ledger, self.accepted))


def compensated_dispatch(
    ctx: DispatchContext,
    obj: Objective,
    ledger: MediatorLedger,
    allow_displacement: bool = True,
) -> CompensatedOutcome:
    base = ntnr(ctx)
    if len(base) == 0:
        return CompensatedOutcome(base, ledger, True)
    p = _reassignment_problem(ctx, base, allow_displacement)
    matching = solve(_objective_weights(p, obj))
    row_of = {t: i for i, t in enumerate(p.rows)}
    col_of = {c: j for j, c in enumerate(p.cols)}
    transfers = []
    staged = ledger
    for taxi_id, cust_id in matching.pairs:
        i = row_of[taxi_id]
        j = col_of[cust_id]
        k = int(p.own_col[i])
        if j == k:
            continue
        c = float(p.comp[i, j])
        staged = ledger_stage(staged, c)
        transfers.append(Transfer(
            taxi_id,
            p.cols[k],
            cust_id,
            ServiceQuote(float(p.pickup[i, k]), float(p.trips[k])),
            ServiceQuote(float(p.pickup[i, j]), float(p.trips[j])),
            c,
        ))
    if not transfers:
        return CompensatedOutcome(base, ledger, True)
    new_ledger, accepted = ledger_commit_or_rollback(staged)
    if accepted:
        return CompensatedOutcome(Assignment(matching.pairs), new_ledger, True, True, transfers)
    return CompensatedOutcome(base, new_ledger, False, True, [])


# --- registry ---------------------------------------------------------------------


@dataclass
class Decision:
    assignment: Assignment
    ledger: MediatorLedger
    proposed: bool = False
    accepted: bool = True
    transfers: List[Transfer] = field(default_factory=list)


Strategy = Callable[[DispatchContext, MediatorLedger], Decision]

STRATEGIES = ("fcfs", "ntnr", "fa", "mindist", "maxrev", "combined")


def make_strategy(
    name: str, gamma: float = DEFAULT_GAMMA, allow_displacement: bool = True
) -> Strategy:
    name = name.lower()
    plain = {"fcfs": fcfs, "ntnr": ntnr, "fa": fa}
    if name in plain:
        fn = plain[name]
        return lambda ctx, ledger: Decision(fn(ctx), ledger)
    if name in (k.value for k in ObjectiveKind):
        obj = Objective(ObjectiveKind(name), gamma)

        def run(ctx: DispatchContext, ledger: MediatorLedger) -> Decision:
            out = compensated_dispatch(ctx, obj, ledger, allow_displacement)
            return Decision(out.assignment, out.ledger, out.proposed, out.accepted, out.transfers)

        return run
    raise ValueError(f"unknown strategy {name!r}; expected one of {', '.join(STRATEGIES)}")
