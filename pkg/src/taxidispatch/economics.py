"""
Trip revenue, reassignment compensation and the mediator ledger.

Sign convention for a compensation ``c``: positive means the mediator pays
the taxi, negative means the taxi pays the mediator.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from .fleet import Customer, Point, TariffScheme
from .spatial import distance

# Absolute slack for "ledger >= 0" and other euro comparisons.
MONEY_EPS = 1e-9


@dataclass(frozen=True)
class ServiceQuote:
    pickup_dist: float
    trip_dist: float

    def __post_init__(self):
        if self.pickup_dist < 0 or self.trip_dist < 0:
            raise ValueError("distances must be non-negative")

    @property
    def total_dist(self) -> float:
        return self.pickup_dist + self.trip_dist


def revenue(tariff: TariffScheme, q: ServiceQuote) -> float:
    """Net revenue of one trip: fixed fee + fare on the occupied leg - running cost."""
    return tariff.fixed_cost + tariff.fare * q.trip_dist - tariff.op_cost * q.total_dist


def compensation(tariff: TariffScheme, old: ServiceQuote, new: ServiceQuote) -> float:
    """Payment that makes swapping from the `old` to the `new` customer acceptable.

    Shorter or equal service: the taxi keeps exactly its old revenue.
    Longer service: it also earns the net rate on the extra meters.
    """
    c = revenue(tariff, old) - revenue(tariff, new)
    if old.total_dist < new.total_dist:
        c += (new.total_dist - old.total_dist) * tariff.net_rate
    return c


def trip_estimate(tariff: TariffScheme, cust: Customer, dest_known: bool) -> float:
    return distance(cust.origin, cust.destination) if dest_known else tariff.est_trip


def quote(tariff: TariffScheme, taxi_pos: Point, cust: Customer, dest_known: bool) -> ServiceQuote:
    return ServiceQuote(distance(taxi_pos, cust.origin), trip_estimate(tariff, cust, dest_known))


def compensation_matrix(
    tariff: TariffScheme,
    old_pickup: np.ndarray,
    old_trip: np.ndarray,
    new_pickup: np.ndarray,
    new_trip: np.ndarray,
) -> np.ndarray:
    """Vectorised `compensation` for rows (taxi, old customer) x columns (new customer).

    ``old_pickup``/``old_trip`` have shape (n,), ``new_pickup`` has shape
    (n, m) and ``new_trip`` shape (m,). Evaluates the same expressions as the
    scalar function, in the same order, so results agree bit for bit.
    """
    old_pickup = old_pickup[:, None]
    old_trip = old_trip[:, None]
    new_trip = np.broadcast_to(new_trip[None, :], new_pickup.shape)
    old_total = old_pickup + old_trip
    new_total = new_pickup + new_trip
    r_old = tariff.fixed_cost + tariff.fare * old_trip - tariff.op_cost * old_total
    r_new = tariff.fixed_cost + tariff.fare * new_trip - tariff.op_cost * new_total
    c = r_old - r_new
    growing = old_total < new_total
    return np.where(growing, c + (new_total - old_total) * tariff.net_rate, c)


@dataclass(frozen=True)
class MediatorLedger:
    committed: float = 0.0
    tentative_delta: float = 0.0


def ledger_stage(ledger: MediatorLedger, c: float) -> MediatorLedger:
    """Book compensation `c` tentatively (the mediator pays c)."""
    return replace(ledger, tentative_delta=ledger.tentative_delta - c)


def ledger_commit_or_rollback(ledger: MediatorLedger) -> Tuple[MediatorLedger, bool]:
    """Apply the staged delta if the balance stays non-negative, otherwise drop it."""
    balance = ledger.committed + ledger.tentative_delta
    if balance >= -MONEY_EPS:
        return MediatorLedger(committed=balance), True
    return MediatorLedger(committed=ledger.committed), False
