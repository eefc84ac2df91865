import pytest
from hypothesis import given, strategies as st

from taxidispatch.fleet import (
    ArriveAtCustomer,
    ArriveAtDestination,
    Assignment,
    Dispatch,
    DropoffComplete,
    IllegalTransition,
    PickupComplete,
    Point,
    Release,
    TariffScheme,
    Taxi,
    TaxiStatus,
    Timing,
    apply_transition,
    available_taxi,
    interpolate,
    partition_taxis,
)

TIMING = Timing(speed=10.0, pickup_dwell=30.0, dropoff_dwell=90.0)


def dispatched(taxi_id=0, cust=5, now=100.0):
    return apply_transition(available_taxi(taxi_id, Point(0, 0)), Dispatch(cust, Point(1000, 0)), now, TIMING)


def test_tariff_rejects_fare_not_above_op_cost():
    with pytest.raises(ValueError):
        TariffScheme(fare=0.1 / 1000, op_cost=0.2 / 1000)
    with pytest.raises(ValueError):
        TariffScheme(est_trip=0)
    assert TariffScheme().net_rate == pytest.approx(0.85 / 1000)


def test_dispatch_from_available():
    t = dispatched()
    assert t.status is TaxiStatus.DISPATCHED
    assert t.customer_id == 5
    assert t.motion.target == Point(1000, 0)
    assert t.motion.arrival == 200.0


def test_full_lifecycle_timing():
    t = dispatched()
    t = apply_transition(t, ArriveAtCustomer(), 200.0, TIMING)
    assert (t.status, t.customer_id, t.until) == (TaxiStatus.PICKUP_DWELL, 5, 230.0)
    t = apply_transition(t, PickupComplete(Point(1000, 6700)), 230.0, TIMING)
    assert t.status is TaxiStatus.OCCUPIED and t.motion.arrival == 900.0
    t = apply_transition(t, ArriveAtDestination(), 900.0, TIMING)
    assert (t.status, t.customer_id, t.until) == (TaxiStatus.DROPOFF_DWELL, None, 990.0)
    assert t.location == Point(1000, 6700)
    t = apply_transition(t, DropoffComplete(), 990.0, TIMING)
    assert t.status is TaxiStatus.AVAILABLE
    t.check()


def test_reassignment_starts_from_current_position():
    t = dispatched()
    t2 = apply_transition(t, Dispatch(6, Point(500, 500)), 150.0, TIMING)
    assert t2.status is TaxiStatus.DISPATCHED and t2.customer_id == 6
    assert t2.motion.origin == Point(500.0, 0.0)
    assert t2.motion.depart == 150.0


def test_reassign_to_same_customer_is_illegal():
    with pytest.raises(IllegalTransition):
        apply_transition(dispatched(), Dispatch(5, Point(1000, 0)), 120.0, TIMING)


def test_release_stops_in_place():
    t = apply_transition(dispatched(), Release(), 150.0, TIMING)
    assert t.status is TaxiStatus.AVAILABLE and t.location == Point(500.0, 0.0)


@pytest.mark.parametrize("event", [ArriveAtCustomer(), PickupComplete(Point(1, 1)), ArriveAtDestination(),
                                   DropoffComplete(), Release()])
def test_illegal_from_available(event):
    with pytest.raises(IllegalTransition):
        apply_transition(available_taxi(0, Point(0, 0)), event, 0.0, TIMING)


def test_arrival_at_wrong_time_is_illegal():
    with pytest.raises(IllegalTransition):
        apply_transition(dispatched(), ArriveAtCustomer(), 150.0, TIMING)


def test_cannot_dispatch_occupied_taxi():
    t = apply_transition(dispatched(), ArriveAtCustomer(), 200.0, TIMING)
    with pytest.raises(IllegalTransition):
        apply_transition(t, Dispatch(9, Point(0, 0)), 210.0, TIMING)


def test_check_detects_inconsistent_taxi():
    with pytest.raises(IllegalTransition):
        Taxi(0, TaxiStatus.DISPATCHED, Point(0, 0), customer_id=1).check()


def test_partition():
    fleet = [available_taxi(0, Point(0, 0)), dispatched(1, 7), apply_transition(
        apply_transition(dispatched(2, 2), ArriveAtCustomer(), 200.0, TIMING),
        PickupComplete(Point(9, 9)), 230.0, TIMING)]
    assert partition_taxis(fleet) == ({0}, {1}, {2})
    assert partition_taxis([]) == (set(), set(), set())
    assert partition_taxis([available_taxi(0, Point(0, 0)), available_taxi(1, Point(1, 1))]) == ({0, 1}, set(), set())


def test_assignment_is_injective():
    a = Assignment([(0, 10), (1, 11)])
    with pytest.raises(ValueError):
        a.add(0, 12)
    with pytest.raises(ValueError):
        a.add(2, 10)
    assert a.customer_of(1) == 11 and a.taxi_of(10) == 0
    b = a.copy()
    b.remove_taxi(0)
    assert len(a) == 2 and len(b) == 1
    assert (1, 11) in b and (0, 10) not in b
    assert a.union(Assignment([(5, 50)])).pairs() == [(0, 10), (1, 11), (5, 50)]


def test_interpolate_examples():
    o, t = Point(0, 0), Point(1000, 0)
    assert interpolate(o, t, 0, 10, 0) == Point(0, 0)
    assert interpolate(o, t, 0, 10, 100) == Point(1000, 0)
    assert interpolate(o, t, 0, 10, 50) == Point(500, 0)
    with pytest.raises(IllegalTransition):
        interpolate(o, t, 0, 10, 101)


coord = st.floats(0, 9000, allow_nan=False)


@given(coord, coord, coord, coord, st.floats(0, 1))
def test_interpolate_stays_on_segment(x0, y0, x1, y1, frac):
    o, t = Point(x0, y0), Point(x1, y1)
    length = ((x1 - x0) ** 2 + (y1 - y0) ** 2) ** 0.5
    p = interpolate(o, t, 0.0, 5.0, frac * length / 5.0)
    d0 = ((p.x - x0) ** 2 + (p.y - y0) ** 2) ** 0.5
    d1 = ((p.x - x1) ** 2 + (p.y - y1) ** 2) ** 0.5
    assert d0 + d1 == pytest.approx(length, abs=1e-6)
    assert d0 == pytest.approx(frac * length, abs=1e-6)
