"""
Domain types for the fleet: points, tariffs, taxis, customers and assignments.

Taxi lifecycle:

    Available -> Dispatched -> PickupDwell -> OccupiedDriving -> DropoffDwell -> Available

plus Dispatched -> Dispatched (reassignment to another customer) and
Dispatched -> Available (released by a global re-optimisation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple


class IllegalTransition(RuntimeError):
    """A state change that the taxi state machine does not allow.

    Always a simulator bug; the run must be aborted.
    """


@dataclass(frozen=True, slots=True)
class Point:
    x: float
    y: float

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class TariffScheme:
    """Payment and cost scheme. Distances are meters, money is euros."""

    fixed_cost: float = 2.4
    fare: float = 1.05 / 1000.0
    op_cost: float = 0.2 / 1000.0
    est_trip: float = 4750.0

    def __post_init__(self):
        if not (self.fare > self.op_cost > 0):
            raise ValueError(
                f"tariff needs fare > op_cost > 0 (got fare={self.fare}, op_cost={self.op_cost})"
            )
        if not self.est_trip > 0:
            raise ValueError(f"est_trip must be positive, got {self.est_trip}")

    @property
    def net_rate(self) -> float:
        """Net income per occupied meter (fare - op_cost)."""
        return self.fare - self.op_cost


# Slack for "now is inside the motion window"; covers float error in arrival times.
TIME_EPS = 1e-6


def interpolate(origin: Point, target: Point, depart: float, speed: float, now: float) -> Point:
    """Position at `now` on the segment origin->target travelled at `speed` from `depart`."""
    if speed <= 0:
        raise ValueError(f"speed must be positive, got {speed}")
    length = math.hypot(target.x - origin.x, target.y - origin.y)
    arrival = depart + length / speed
    if now < depart - TIME_EPS or now > arrival + TIME_EPS:
        raise IllegalTransition(
            f"position requested at t={now} outside motion window [{depart}, {arrival}]"
        )
    if now <= depart or length == 0.0:
        return origin
    if now >= arrival:
        return target
    frac = (now - depart) * speed / length
    return Point(origin.x + frac * (target.x - origin.x), origin.y + frac * (target.y - origin.y))


class TaxiStatus(Enum):
    AVAILABLE = "available"
    DISPATCHED = "dispatched"
    PICKUP_DWELL = "pickup_dwell"
    OCCUPIED = "occupied_driving"
    DROPOFF_DWELL = "dropoff_dwell"


class CustomerStatus(Enum):
    UNASSIGNED = "unassigned"
    ASSIGNED = "assigned"
    IN_SERVICE = "in_service"
    SERVED = "served"


@dataclass(frozen=True, slots=True)
class Motion:
    """Straight-line constant-speed motion segment."""

    origin: Point
    target: Point
    depart: float
    speed: float

    @property
    def length(self) -> float:
        return math.hypot(self.target.x - self.origin.x, self.target.y - self.origin.y)

    @property
    def arrival(self) -> float:
        return self.depart + self.length / self.speed

    def position(self, now: float) -> Point:
        return interpolate(self.origin, self.target, self.depart, self.speed, now)


@dataclass(frozen=True, slots=True)
class Taxi:
    id: int
    status: TaxiStatus
    location: Point  # stationary point, or the origin of the current motion
    customer_id: Optional[int] = None
    until: Optional[float] = None
    motion: Optional[Motion] = None

    def position(self, now: float) -> Point:
        if self.motion is None:
            return self.location
        return self.motion.position(now)

    def check(self) -> None:
        moving = self.status in (TaxiStatus.DISPATCHED, TaxiStatus.OCCUPIED)
        if moving != (self.motion is not None):
            raise IllegalTransition(f"taxi {self.id}: motion inconsistent with {self.status}")
        needs_customer = self.status in (
            TaxiStatus.DISPATCHED, TaxiStatus.PICKUP_DWELL, TaxiStatus.OCCUPIED
        )
        if needs_customer != (self.customer_id is not None):
            raise IllegalTransition(f"taxi {self.id}: customer inconsistent with {self.status}")
        dwelling = self.status in (TaxiStatus.PICKUP_DWELL, TaxiStatus.DROPOFF_DWELL)
        if dwelling != (self.until is not None):
            raise IllegalTransition(f"taxi {self.id}: dwell deadline inconsistent with {self.status}")


def available_taxi(taxi_id: int, at: Point) -> Taxi:
    return Taxi(id=taxi_id, status=TaxiStatus.AVAILABLE, location=at)


@dataclass(slots=True)
class Customer:
    id: int
    request_time: float
    origin: Point
    destination: Point
    dest_known: bool = False
    status: CustomerStatus = CustomerStatus.UNASSIGNED
    taxi_id: Optional[int] = None
    pickup_time: Optional[float] = None

    @property
    def trip_length(self) -> float:
        return math.hypot(self.destination.x - self.origin.x, self.destination.y - self.origin.y)


# --- transition events -------------------------------------------------------


@dataclass(frozen=True)
class Dispatch:
    """Send the taxi to a customer's origin (also used for reassignment)."""

    customer_id: int
    pickup: Point


@dataclass(frozen=True)
class Release:
    """Drop the current customer while en route; the taxi stops where it is."""


@dataclass(frozen=True)
class ArriveAtCustomer:
    pass


@dataclass(frozen=True)
class PickupComplete:
    destination: Point


@dataclass(frozen=True)
class ArriveAtDestination:
    pass


@dataclass(frozen=True)
class DropoffComplete:
    pass


TransitionEvent = Dispatch | Release | ArriveAtCustomer | PickupComplete | ArriveAtDestination | DropoffComplete


@dataclass(frozen=True)
class Timing:
    speed: float = 17.0 * 1000.0 / 3600.0  # m/s
    pickup_dwell: float = 30.0
    dropoff_dwell: float = 90.0


def _check_arrival(taxi: Taxi, now: float) -> None:
    if abs(now - taxi.motion.arrival) > TIME_EPS:
        raise IllegalTransition(
            f"taxi {taxi.id}: arrival processed at t={now}, expected {taxi.motion.arrival}"
        )


def apply_transition(taxi: Taxi, event: TransitionEvent, now: float, timing: Timing = Timing()) -> Taxi:
    """Return `taxi` in the successor state for `event` at time `now`.

    Raises IllegalTransition when the event is not allowed in the current state.
    """
    status = taxi.status
    if isinstance(event, Dispatch):
        if status is TaxiStatus.AVAILABLE:
            start = taxi.location
        elif status is TaxiStatus.DISPATCHED:
            if event.customer_id == taxi.customer_id:
                raise IllegalTransition(f"taxi {taxi.id}: reassigned to its own customer")
            start = taxi.position(now)
        else:
            raise IllegalTransition(f"taxi {taxi.id}: cannot dispatch while {status.value}")
        motion = Motion(start, event.pickup, now, timing.speed)
        return Taxi(taxi.id, TaxiStatus.DISPATCHED, start, event.customer_id, None, motion)

    if isinstance(event, Release):
        if status is not TaxiStatus.DISPATCHED:
            raise IllegalTransition(f"taxi {taxi.id}: cannot release while {status.value}")
        return available_taxi(taxi.id, taxi.position(now))

    if isinstance(event, ArriveAtCustomer):
        if status is not TaxiStatus.DISPATCHED:
            raise IllegalTransition(f"taxi {taxi.id}: arrival at customer while {status.value}")
        _check_arrival(taxi, now)
        at = taxi.motion.target
        return Taxi(taxi.id, TaxiStatus.PICKUP_DWELL, at, taxi.customer_id, now + timing.pickup_dwell)

    if isinstance(event, PickupComplete):
        if status is not TaxiStatus.PICKUP_DWELL:
            raise IllegalTransition(f"taxi {taxi.id}: pickup completion while {status.value}")
        motion = Motion(taxi.location, event.destination, now, timing.speed)
        return Taxi(taxi.id, TaxiStatus.OCCUPIED, taxi.location, taxi.customer_id, None, motion)

    if isinstance(event, ArriveAtDestination):
        if status is not TaxiStatus.OCCUPIED:
            raise IllegalTransition(f"taxi {taxi.id}: arrival at destination while {status.value}")
        _check_arrival(taxi, now)
        at = taxi.motion.target
        return Taxi(taxi.id, TaxiStatus.DROPOFF_DWELL, at, None, now + timing.dropoff_dwell)

    if isinstance(event, DropoffComplete):
        if status is not TaxiStatus.DROPOFF_DWELL:
            raise IllegalTransition(f"taxi {taxi.id}: dropoff completion while {status.value}")
        return replace(taxi, status=TaxiStatus.AVAILABLE, until=None)

    raise IllegalTransition(f"unknown event {event!r}")


def partition_taxis(fleet: Iterable[Taxi]) -> Tuple[Set[int], Set[int], Set[int]]:
    """Split the fleet into (available, dispatched, occupied) id sets.

    Both dwell states count as occupied.
    """
    available: Set[int] = set()
    dispatched: Set[int] = set()
    occupied: Set[int] = set()
    for taxi in fleet:
        if taxi.status is TaxiStatus.AVAILABLE:
            available.add(taxi.id)
        elif taxi.status is TaxiStatus.DISPATCHED:
            dispatched.add(taxi.id)
        else:
            occupied.add(taxi.id)
    return available, dispatched, occupied


class Assignment:
    """Injective set of (taxi_id, customer_id) pairs."""

    __slots__ = ("_by_taxi", "_by_customer")

    def __init__(self, pairs: Iterable[Tuple[int, int]] = ()):
        self._by_taxi: Dict[int, int] = {}
        self._by_customer: Dict[int, int] = {}
        for taxi_id, customer_id in pairs:
            self.add(taxi_id, customer_id)

    def add(self, taxi_id: int, customer_id: int) -> None:
        if taxi_id in self._by_taxi:
            raise ValueError(f"taxi {taxi_id} already assigned to customer {self._by_taxi[taxi_id]}")
        if customer_id in self._by_customer:
            raise ValueError(f"customer {customer_id} already assigned to taxi {self._by_customer[customer_id]}")
        self._by_taxi[taxi_id] = customer_id
        self._by_customer[customer_id] = taxi_id

    def remove_taxi(self, taxi_id: int) -> int:
        customer_id = self._by_taxi.pop(taxi_id)
        del self._by_customer[customer_id]
        return customer_id

    def customer_of(self, taxi_id: int) -> Optional[int]:
        return self._by_taxi.get(taxi_id)

    def taxi_of(self, customer_id: int) -> Optional[int]:
        return self._by_customer.get(customer_id)

    def taxis(self) -> List[int]:
        return sorted(self._by_taxi)

    def customers(self) -> List[int]:
        return sorted(self._by_customer)

    def pairs(self) -> List[Tuple[int, int]]:
        return sorted(self._by_taxi.items())

    def copy(self) -> "Assignment":
        new = Assignment()
        new._by_taxi = dict(self._by_taxi)
        new._by_customer = dict(self._by_customer)
        return new

    def union(self, other: "Assignment") -> "Assignment":
        new = self.copy()
        for t, c in other.pairs():
            new.add(t, c)
        return new

    def __contains__(self, pair: Tuple[int, int]) -> bool:
        return self._by_taxi.get(pair[0]) == pair[1]

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(self.pairs())

    def __len__(self) -> int:
        return len(self._by_taxi)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Assignment) and self._by_taxi == other._by_taxi

    def __repr__(self) -> str:
        return f"Assignment({self.pairs()})"
