"""
Time-stepped fleet simulation.

The clock advances in fixed dispatch ticks. Inside a tick, taxi events
(arrivals, dwell completions) are processed at their exact analytic times
from a priority queue; the dispatch strategy is consulted only on tick
boundaries and only when a customer appeared or a taxi became free since
the previous consultation. After the demand horizon the loop keeps ticking
until every generated customer has been delivered.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import ScenarioConfig
from .dispatch import Decision, DispatchContext, Transfer, make_strategy
from .economics import MONEY_EPS, MediatorLedger
from .fleet import (
    ArriveAtCustomer,
    ArriveAtDestination,
    Assignment,
    Customer,
    CustomerStatus,
    Dispatch,
    DropoffComplete,
    IllegalTransition,
    PickupComplete,
    Point,
    Release,
    Taxi,
    TaxiStatus,
    apply_transition,
    available_taxi,
)
from .spatial import distance, gen_demand, gen_uniform_point

log = logging.getLogger(__name__)

# Give up if the queue has not drained this long after the demand horizon.
MAX_DRAIN = 30 * 24 * 3600.0


class SimulationError(RuntimeError):
    """Inconsistent simulator state; the run is aborted."""


# event kinds, ordered so that simultaneous events of one taxi sort sensibly
_ARRIVE_PICKUP, _PICKUP_DONE, _ARRIVE_DEST, _DROPOFF_DONE = range(4)


@dataclass
class RunMetrics:
    avg_wait: float  # minutes
    waits: np.ndarray  # seconds, per customer id
    taxi_revenue: np.ndarray  # effective EUR per taxi: fares - running cost + compensation
    mediator_revenue: float
    served_count: int
    reassignment_count: int
    rejection_count: int
    dispatch_count: int = 0
    proposal_count: int = 0
    accepted_proposals: int = 0
    release_count: int = 0
    customer_payments: float = 0.0
    taxi_op_cost: np.ndarray = field(default_factory=lambda: np.zeros(0))
    taxi_compensation: np.ndarray = field(default_factory=lambda: np.zeros(0))
    oversaturated_ticks: int = 0
    strategy_calls: int = 0
    min_committed: float = 0.0
    end_time: float = 0.0
    event_log: List[Tuple] = field(default_factory=list)
    ledger_trace: List[Tuple[float, float, int, int]] = field(default_factory=list)
    customer_rows: List[Tuple] = field(default_factory=list)
    transfers: List[Tuple[float, Transfer]] = field(default_factory=list)

    @property
    def taxi_total(self) -> float:
        return float(self.taxi_revenue.sum())


def record_wait(cust: Customer) -> float:
    """Seconds between the request and the taxi reaching the pickup point."""
    if cust.pickup_time is None:
        raise SimulationError(f"customer {cust.id} has no pickup time")
    return cust.pickup_time - cust.request_time


def initial_state(config: ScenarioConfig) -> Tuple[List[Point], List[Customer]]:
    """Taxi start positions and demand for a seed; independent of the strategy."""
    fleet_seq, demand_seq = np.random.SeedSequence(config.seed).spawn(2)
    fleet_rng = np.random.Generator(np.random.PCG64(fleet_seq))
    demand_rng = np.random.Generator(np.random.PCG64(demand_seq))
    positions = [gen_uniform_point(fleet_rng, config.area) for _ in range(config.n_taxis)]
    customers = gen_demand(
        demand_rng, config.demand, config.area, config.center_params, config.dest_known
    )
    return positions, customers


class Simulation:
    def __init__(
        self,
        config: ScenarioConfig,
        taxi_positions: Optional[Sequence[Point]] = None,
        customers: Optional[Sequence[Customer]] = None,
        check_invariants: bool = False,
        keep_trace: bool = True,
    ):
        self.config = config
        if taxi_positions is None or customers is None:
            gen_pos, gen_cust = initial_state(config)
            taxi_positions = gen_pos if taxi_positions is None else taxi_positions
            customers = gen_cust if customers is None else customers
        self.timing = config.timing
        self.tariff = config.tariff
        self.strategy = make_strategy(config.strategy, config.gamma, config.allow_displacement)
        self.check_invariants = check_invariants
        self.keep_trace = keep_trace

        self.taxis: List[Taxi] = [available_taxi(i, p) for i, p in enumerate(taxi_positions)]
        self.customers: List[Customer] = sorted(
            (
                Customer(c.id, c.request_time, c.origin, c.destination, config.dest_known)
                for c in customers
            ),
            key=lambda c: (c.request_time, c.id),
        )
        self.by_id: Dict[int, Customer] = {c.id: c for c in self.customers}
        if len(self.by_id) != len(self.customers):
            raise SimulationError("duplicate customer ids")
        if self.customers and not self.taxis:
            raise SimulationError("customers but no taxis: the queue can never drain")

        n = len(self.taxis)
        self.version = [0] * n
        self.driven = np.zeros(n)
        self.fares = np.zeros(n)
        self.comp = np.zeros(n)
        self.open: Dict[int, Customer] = {}
        self.assignment = Assignment()
        self.ledger = MediatorLedger()
        self.heap: List[Tuple[float, int, int, int]] = []
        self.next_customer = 0
        self.changed = False
        self.clock = 0.0
        self._tick = 0
        self.served = 0
        self.reassigned: Dict[int, int] = {}
        self.pickup_taxi: Dict[int, int] = {}
        self.counts = dict(dispatch=0, pickup=0, dropoff=0, reassign=0, release=0,
                           proposals=0, accepted=0, rejected=0, oversat=0, calls=0)
        self.min_committed = 0.0
        self.events: List[Tuple] = []
        self.ledger_trace: List[Tuple[float, float, int, int]] = []
        self.transfers: List[Tuple[float, Transfer]] = []

    # --- bookkeeping helpers ----------------------------------------------------

    def _log(self, t: float, kind: str, taxi: Optional[int], cust: Optional[int]) -> None:
        if self.keep_trace:
            self.events.append((t, kind, taxi, cust))

    def _set_taxi(self, taxi: Taxi) -> None:
        self.taxis[taxi.id] = taxi
        self.version[taxi.id] += 1

    def _schedule(self, t: float, taxi_id: int, kind: int) -> None:
        heapq.heappush(self.heap, (t, taxi_id, self.version[taxi_id], kind))

    # --- world dynamics ---------------------------------------------------------

    def _admit(self, now: float) -> None:
        while self.next_customer < len(self.customers):
            c = self.customers[self.next_customer]
            if c.request_time > now:
                break
            self.open[c.id] = c
            self.next_customer += 1
            self.changed = True

    def _advance(self, now: float) -> None:
        timing = self.timing
        while self.heap and self.heap[0][0] <= now:
            t, taxi_id, version, kind = heapq.heappop(self.heap)
            if version != self.version[taxi_id]:
                continue
            taxi = self.taxis[taxi_id]
            if kind == _ARRIVE_PICKUP:
                cust = self.by_id[taxi.customer_id]
                self.driven[taxi_id] += taxi.motion.length
                taxi = apply_transition(taxi, ArriveAtCustomer(), t, timing)
                self.assignment.remove_taxi(taxi_id)
                del self.open[cust.id]
                cust.status = CustomerStatus.IN_SERVICE
                cust.pickup_time = t
                self.pickup_taxi[cust.id] = taxi_id
                self.counts["pickup"] += 1
                self._set_taxi(taxi)
                self._schedule(taxi.until, taxi_id, _PICKUP_DONE)
                self._log(t, "pickup", taxi_id, cust.id)
            elif kind == _PICKUP_DONE:
                cust = self.by_id[taxi.customer_id]
                taxi = apply_transition(taxi, PickupComplete(cust.destination), t, timing)
                self._set_taxi(taxi)
                self._schedule(taxi.motion.arrival, taxi_id, _ARRIVE_DEST)
            elif kind == _ARRIVE_DEST:
                cust = self.by_id[taxi.customer_id]
                self.driven[taxi_id] += taxi.motion.length
                self.fares[taxi_id] += self.tariff.fixed_cost + self.tariff.fare * cust.trip_length
                taxi = apply_transition(taxi, ArriveAtDestination(), t, timing)
                cust.status = CustomerStatus.SERVED
                self.served += 1
                self.counts["dropoff"] += 1
                self._set_taxi(taxi)
                self._schedule(taxi.until, taxi_id, _DROPOFF_DONE)
                self._log(t, "dropoff", taxi_id, cust.id)
            elif kind == _DROPOFF_DONE:
                taxi = apply_transition(taxi, DropoffComplete(), t, timing)
                self._set_taxi(taxi)
                self.changed = True
                self._log(t, "available", taxi_id, None)

    def _dispatch(self, taxi_id: int, cust: Customer, now: float) -> None:
        taxi = self.taxis[taxi_id]
        if taxi.status is TaxiStatus.DISPATCHED:
            self.driven[taxi_id] += distance(taxi.motion.origin, taxi.position(now))
        taxi = apply_transition(taxi, Dispatch(cust.id, cust.origin), now, self.timing)
        self._set_taxi(taxi)
        self._schedule(taxi.motion.arrival, taxi_id, _ARRIVE_PICKUP)

    def _apply(self, decision: Decision, now: float) -> None:
        new, old = decision.assignment, self.assignment
        for taxi_id, cust_id in new.pairs():
            if cust_id not in self.open:
                raise SimulationError(f"t={now}: strategy assigned closed customer {cust_id}")
            status = self.taxis[taxi_id].status
            if status not in (TaxiStatus.AVAILABLE, TaxiStatus.DISPATCHED):
                raise SimulationError(f"t={now}: strategy used taxi {taxi_id} while {status.value}")
        for taxi_id, cust_id in old.pairs():
            if new.customer_of(taxi_id) is None:
                taxi = self.taxis[taxi_id]
                self.driven[taxi_id] += distance(taxi.motion.origin, taxi.position(now))
                self._set_taxi(apply_transition(taxi, Release(), now, self.timing))
                self.counts["release"] += 1
                self._log(now, "release", taxi_id, cust_id)
        for taxi_id, cust_id in new.pairs():
            prev = old.customer_of(taxi_id)
            if prev == cust_id:
                continue
            self._dispatch(taxi_id, self.by_id[cust_id], now)
            if prev is None:
                self.counts["dispatch"] += 1
                self._log(now, "dispatch", taxi_id, cust_id)
            else:
                self.counts["reassign"] += 1
                self._log(now, "reassign", taxi_id, cust_id)
        for cust_id in old.customers():
            if new.taxi_of(cust_id) is None:
                cust = self.by_id[cust_id]
                cust.status = CustomerStatus.UNASSIGNED
                cust.taxi_id = None
                self.reassigned[cust_id] = self.reassigned.get(cust_id, 0) + 1
                self._log(now, "unassign", None, cust_id)
        for taxi_id, cust_id in new.pairs():
            cust = self.by_id[cust_id]
            if cust.taxi_id is not None and cust.taxi_id != taxi_id:
                self.reassigned[cust_id] = self.reassigned.get(cust_id, 0) + 1
            cust.status = CustomerStatus.ASSIGNED
            cust.taxi_id = taxi_id
        for tr in decision.transfers:
            self.comp[tr.taxi_id] += tr.amount
            self.transfers.append((now, tr))
        self.assignment = new
        self.ledger = decision.ledger

    def _decide(self, now: float) -> Tuple[int, int]:
        ctx = DispatchContext(now, self.taxis, self.open, self.assignment, self.tariff, self.config.dest_known)
        self.counts["calls"] += 1
        if len(ctx.waiting) > len(ctx.available):
            self.counts["oversat"] += 1
        decision = self.strategy(ctx, self.ledger)
        self._apply(decision, now)
        accepted = rejected = 0
        if decision.proposed:
            self.counts["proposals"] += 1
            if decision.accepted:
                accepted = 1
                self.counts["accepted"] += 1
            else:
                rejected = 1
                self.counts["rejected"] += 1
        return accepted, rejected

    # --- consistency --------------------------------------------------------------

    def check(self) -> None:
        """Full cross-check of taxi states, customer states and the assignment."""
        try:
            for taxi in self.taxis:
                taxi.check()
                paired = self.assignment.customer_of(taxi.id)
                if taxi.status is TaxiStatus.DISPATCHED:
                    if paired != taxi.customer_id:
                        raise SimulationError(f"taxi {taxi.id} dispatched to {taxi.customer_id} but paired with {paired}")
                elif paired is not None:
                    raise SimulationError(f"taxi {taxi.id} is {taxi.status.value} but paired with {paired}")
        except IllegalTransition as exc:
            raise SimulationError(str(exc)) from exc
        for cust in self.open.values():
            taxi_id = self.assignment.taxi_of(cust.id)
            if cust.status is CustomerStatus.ASSIGNED:
                if taxi_id is None or taxi_id != cust.taxi_id:
                    raise SimulationError(f"customer {cust.id} assigned state disagrees with assignment")
            elif cust.status is CustomerStatus.UNASSIGNED:
                if taxi_id is not None:
                    raise SimulationError(f"waiting customer {cust.id} holds taxi {taxi_id}")
            else:
                raise SimulationError(f"customer {cust.id} is open but {cust.status.value}")
            if cust.pickup_time is not None:
                raise SimulationError(f"open customer {cust.id} has a pickup time")
        c = self.counts
        if not (c["dispatch"] >= c["pickup"] >= c["dropoff"]):
            raise SimulationError(f"event counts out of order: {c}")
        if self.ledger.committed < -MONEY_EPS:
            raise SimulationError(f"mediator balance negative: {self.ledger.committed}")

    # --- main loop ------------------------------------------------------------------

    @property
    def finished(self) -> bool:
        return self.clock >= self.config.demand.horizon and self.served == len(self.customers)

    def step(self) -> None:
        """Process the tick at the current clock, then move the clock one tick on."""
        now = self.clock
        if now > self.config.demand.horizon + MAX_DRAIN:
            raise SimulationError(f"queue did not drain by t={now}")
        self._admit(now)
        self._advance(now)
        accepted = rejected = 0
        if self.changed:
            self.changed = False
            accepted, rejected = self._decide(now)
            self._advance(now)  # zero-length pickups complete immediately
        self.min_committed = min(self.min_committed, self.ledger.committed)
        if self.keep_trace:
            self.ledger_trace.append((now, self.ledger.committed, accepted, rejected))
        if self.check_invariants:
            self.check()
        self._tick += 1
        self.clock = self._tick * self.config.tick

    def run(self) -> RunMetrics:
        while not self.finished:
            self.step()
        return self._metrics()

    def _metrics(self) -> RunMetrics:
        waits = np.array([record_wait(c) for c in sorted(self.customers, key=lambda c: c.id)])
        op_cost = self.tariff.op_cost * self.driven
        taxi_revenue = self.fares - op_cost + self.comp
        payments = math.fsum(
            self.tariff.fixed_cost + self.tariff.fare * c.trip_length for c in self.customers
        )
        rows = []
        if self.keep_trace:
            for c in sorted(self.customers, key=lambda c: c.id):
                rows.append((
                    c.id, c.request_time, c.pickup_time, c.pickup_time - c.request_time,
                    self.pickup_taxi[c.id], self.reassigned.get(c.id, 0),
                ))
        return RunMetrics(
            avg_wait=float(waits.mean() / 60.0) if len(waits) else 0.0,
            waits=waits,
            taxi_revenue=taxi_revenue,
            mediator_revenue=self.ledger.committed,
            served_count=self.served,
            reassignment_count=self.counts["reassign"],
            rejection_count=self.counts["rejected"],
            dispatch_count=self.counts["dispatch"],
            proposal_count=self.counts["proposals"],
            accepted_proposals=self.counts["accepted"],
            release_count=self.counts["release"],
            customer_payments=payments,
            taxi_op_cost=op_cost,
            taxi_compensation=self.comp.copy(),
            oversaturated_ticks=self.counts["oversat"],
            strategy_calls=self.counts["calls"],
            min_committed=self.min_committed,
            end_time=self.clock,
            event_log=self.events,
            ledger_trace=self.ledger_trace,
            customer_rows=rows,
            transfers=self.transfers,
        )


def run(config: ScenarioConfig, **kwargs) -> RunMetrics:
    return Simulation(config, **kwargs).run()
