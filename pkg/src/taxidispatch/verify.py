"""
Self-checks run by ``taxidispatch verify``: solver against brute force, the
two-taxi swap scenario, and a small full run with every invariant enabled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .assignment import Sense, WeightMatrix, brute_force, solve
from .config import ScenarioConfig, desk_config, from_flat
from .economics import MONEY_EPS, revenue
from .engine import Simulation, run
from .fleet import Customer, Point, TaxiStatus


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


# Two taxis, two customers, 5 m/s. The first customer calls at t=0 and gets the
# nearer taxi; the second calls at t=60 when that taxi has covered 300 m.
# Keeping the pairing costs 1650 + 2350 m of pickup driving, swapping 1500 + 2000 m.
SWAP_TAXIS = (Point(3950.0, 2000.0), Point(400.0, 3200.0))
SWAP_CUSTOMERS = (
    Customer(0, 0.0, Point(2000.0, 2000.0), Point(2000.0, 6000.0)),
    Customer(1, 60.0, Point(2750.0, 3200.0), Point(6750.0, 3200.0)),
)
SWAP_DECISION_TIME = 60.0


def swap_scenario(strategy: str) -> Simulation:
    """The two-taxi scenario stepped through the decision at t=60."""
    cfg = from_flat({
        "n_taxis": 2, "speed": 18.0, "horizon": 900.0, "customers_per_interval": 0,
        "strategy": strategy,
    })
    sim = Simulation(cfg, SWAP_TAXIS, SWAP_CUSTOMERS, check_invariants=True)
    while sim.clock <= SWAP_DECISION_TIME:
        sim.step()
    return sim


def pending_pickup_distance(sim: Simulation, at: float = SWAP_DECISION_TIME) -> float:
    """Pickup meters left to drive at time `at`, summed over dispatched taxis."""
    return math.fsum(
        t.motion.length - t.motion.speed * (at - t.motion.depart)
        for t in sim.taxis
        if t.status is TaxiStatus.DISPATCHED
    )


def check_solver(n_per_shape: int = 200, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    total = 0
    for shape in [(3, 3), (5, 5), (5, 8), (8, 5), (8, 8)]:
        for k in range(n_per_shape):
            if k % 2:
                w = rng.integers(0, 20, size=shape).astype(float)
            else:
                w = rng.uniform(0.0, 100.0, size=shape)
            sense = Sense.MINIMIZE if k % 3 else Sense.MAXIMIZE
            m = WeightMatrix(w, sense)
            got, want = solve(m), brute_force(m)
            total += 1
            if abs(got.total - want.total) > 1e-9 * max(1.0, abs(want.total)):
                bad += 1
    return CheckResult("solver matches brute force", bad == 0, f"{total - bad}/{total} matrices")


def check_swap() -> CheckResult:
    expect = {"fcfs": 4000.0, "ntnr": 4000.0, "fa": 3500.0,
              "mindist": 3500.0, "maxrev": 3500.0, "combined": 3500.0}
    got = {s: pending_pickup_distance(swap_scenario(s)) for s in expect}
    ok = all(got[s] == expect[s] for s in expect)
    return CheckResult("two-taxi swap scenario", ok, ", ".join(f"{s}={got[s]:g} m" for s in got))


def check_desk_run(config: Optional[ScenarioConfig] = None) -> List[CheckResult]:
    cfg = config or desk_config()
    m = run(cfg, check_invariants=True)
    tariff = cfg.tariff
    worst = math.inf
    for _, tr in m.transfers:
        worst = min(worst, revenue(tariff, tr.new_quote) + tr.amount - revenue(tariff, tr.old_quote))
    rational = not m.transfers or worst >= -MONEY_EPS
    balance_ok = all(bal >= -MONEY_EPS for _, bal, _, _ in m.ledger_trace)
    rhs = math.fsum(m.taxi_revenue) + math.fsum(m.taxi_op_cost) + m.mediator_revenue
    gap = abs(m.customer_payments - rhs)
    again = run(cfg)
    same = (
        np.array_equal(m.waits, again.waits)
        and m.ledger_trace == again.ledger_trace
        and m.customer_rows == again.customer_rows
    )
    return [
        CheckResult("desk run invariants", True, f"{m.served_count} customers served"),
        CheckResult("reassignments are rational", rational,
                    f"{len(m.transfers)} transfers, worst margin {worst if m.transfers else 0.0:.3g} EUR"),
        CheckResult("mediator balance never negative", balance_ok, f"min {m.min_committed:.6g} EUR"),
        CheckResult("money is conserved", gap <= 1e-6, f"gap {gap:.3g} EUR"),
        CheckResult("runs are deterministic", same, "two identical runs"),
    ]


def run_all(log: Callable[[str], None] = print) -> bool:
    results: List[CheckResult] = []
    for check in (check_solver, check_swap):
        results.append(check())
        log(_line(results[-1]))
    for r in check_desk_run():
        results.append(r)
        log(_line(r))
    return all(r.ok for r in results)


def _line(r: CheckResult) -> str:
    return f"{'PASS' if r.ok else 'FAIL'}  {r.name}: {r.detail}"
