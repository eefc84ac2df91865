"""
Experiment grid over demand rates, strategies and seeds, plus CSV/text reports.

Every (rate, seed) pair has one demand realization shared by all strategies,
so strategy comparisons within a cell are paired. NTNR is the reference for
the delta columns.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .config import ConfigError, ScenarioConfig
from .dispatch import STRATEGIES
from .engine import RunMetrics, run

log = logging.getLogger(__name__)

BASELINE = "ntnr"

WAITS_HEADER = ["rate", "strategy", "mean_wait_min", "abs_delta_min", "rel_delta_pct"]
REVENUE_HEADER = ["rate", "strategy", "taxi_total_eur_per_1000", "mediator_eur_per_1000", "system_total"]
CUSTOMERS_HEADER = ["id", "request_time", "pickup_time", "wait_s", "taxi_id", "reassigned_count"]
LEDGER_HEADER = ["tick", "committed_eur", "accepted", "rejected"]


@dataclass(frozen=True)
class RunSummary:
    rate: float
    strategy: str
    seed: int
    avg_wait: float
    served: int
    taxi_total: float
    mediator: float
    dispatches: int
    reassignments: int
    proposals: int
    accepted: int
    rejections: int
    min_committed: float
    oversaturated_ticks: int
    seconds: float = field(default=0.0, compare=False)  # wall time of the run


@dataclass
class Cell:
    rate: float
    strategy: str
    mean_wait: float
    abs_delta: float
    rel_delta: float
    taxi_per_1000: float
    mediator_per_1000: float

    @property
    def system_per_1000(self) -> float:
        return self.taxi_per_1000 + self.mediator_per_1000


@dataclass
class ExperimentReport:
    rates: List[float] = field(default_factory=list)
    strategies: List[str] = field(default_factory=list)
    seeds: List[int] = field(default_factory=list)
    cells: Dict[Tuple[float, str], Cell] = field(default_factory=dict)
    runs: List[RunSummary] = field(default_factory=list)

    def cell(self, rate: float, strategy: str) -> Cell:
        return self.cells[(float(rate), strategy)]

    def runs_for(self, rate: float, strategy: str) -> List[RunSummary]:
        return [r for r in self.runs if r.rate == float(rate) and r.strategy == strategy]


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_customers_csv(metrics: RunMetrics, path: Union[str, Path]) -> None:
    rows = (
        (cid, _fmt(req), _fmt(pick), _fmt(wait), taxi, n)
        for cid, req, pick, wait, taxi, n in metrics.customer_rows
    )
    _write_csv(Path(path), CUSTOMERS_HEADER, rows)


def write_ledger_csv(metrics: RunMetrics, path: Union[str, Path]) -> None:
    rows = ((_fmt(t), _fmt(bal), acc, rej) for t, bal, acc, rej in metrics.ledger_trace)
    _write_csv(Path(path), LEDGER_HEADER, rows)


def write_run(metrics: RunMetrics, outdir: Union[str, Path]) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_customers_csv(metrics, outdir / "customers.csv")
    write_ledger_csv(metrics, outdir / "ledger.csv")


def run_dir_name(rate: float, strategy: str, seed: int) -> str:
    return f"rate{rate:g}_{strategy}_seed{seed}"


def _one_run(job: Tuple[ScenarioConfig, float, Optional[str]]) -> RunSummary:
    cfg, rate, trace_dir = job
    keep = trace_dir is not None
    start = time.perf_counter()
    try:
        m = run(cfg, keep_trace=keep)
    except Exception as exc:
        raise RuntimeError(
            f"run failed (rate={rate:g}/h, strategy={cfg.strategy}, seed={cfg.seed}): {exc}"
        ) from exc
    if keep:
        write_run(m, Path(trace_dir) / run_dir_name(rate, cfg.strategy, cfg.seed))
    return RunSummary(
        rate=float(rate),
        strategy=cfg.strategy,
        seed=cfg.seed,
        avg_wait=m.avg_wait,
        served=m.served_count,
        taxi_total=m.taxi_total,
        mediator=m.mediator_revenue,
        dispatches=m.dispatch_count,
        reassignments=m.reassignment_count,
        proposals=m.proposal_count,
        accepted=m.accepted_proposals,
        rejections=m.rejection_count,
        min_committed=m.min_committed,
        oversaturated_ticks=m.oversaturated_ticks,
        seconds=time.perf_counter() - start,
    )


def aggregate(runs: Sequence[RunSummary], rates, strategies, seeds) -> ExperimentReport:
    report = ExperimentReport([float(r) for r in rates], list(strategies), list(seeds), {}, list(runs))
    for rate in report.rates:
        base = _mean([r.avg_wait for r in report.runs_for(rate, BASELINE)])
        for s in report.strategies:
            rs = report.runs_for(rate, s)
            mean_wait = _mean([r.avg_wait for r in rs])
            served = sum(r.served for r in rs)
            per = served / 1000.0
            taxi = math.fsum(r.taxi_total for r in rs) / per if per else 0.0
            med = math.fsum(r.mediator for r in rs) / per if per else 0.0
            abs_delta = mean_wait - base
            rel_delta = 100.0 * abs_delta / base if base else 0.0
            report.cells[(rate, s)] = Cell(rate, s, mean_wait, abs_delta, rel_delta, taxi, med)
    return report


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs) if xs else 0.0


def run_grid(
    config: ScenarioConfig,
    rates: Sequence[float],
    strategies: Sequence[str],
    seeds: Sequence[int],
    jobs: int = 1,
    trace_dir: Optional[Union[str, Path]] = None,
) -> ExperimentReport:
    """One run per (rate, strategy, seed); revenue is normalized per 1000 served customers."""
    strategies = [s.lower() for s in strategies]
    if BASELINE not in strategies:
        raise ConfigError(f"strategies must include the {BASELINE} baseline")
    unknown = [s for s in strategies if s not in STRATEGIES]
    if unknown:
        raise ConfigError(f"unknown strategies: {', '.join(unknown)}")
    if not rates or not seeds:
        raise ConfigError("need at least one rate and one seed")
    trace = None if trace_dir is None else str(trace_dir)
    grid = []
    for rate in rates:
        rated = config.with_rate(rate)
        for s in strategies:
            for seed in seeds:
                grid.append((replace(rated, strategy=s, seed=int(seed)), float(rate), trace))
    log.info("running %d simulations with %d worker(s)", len(grid), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_one_run, grid))
    else:
        runs = [_one_run(job) for job in grid]
    return aggregate(runs, rates, strategies, seeds)


def format_table(report: ExperimentReport) -> str:
    """Mean wait per rate and strategy; non-baseline cells add (abs min / rel %) vs NTNR."""
    head = ["rate/h"] + report.strategies
    lines = []
    for rate in report.rates:
        row = [f"{rate:g}"]
        for s in report.strategies:
            c = report.cell(rate, s)
            if s == BASELINE:
                row.append(f"{c.mean_wait:.2f}")
            else:
                row.append(f"{c.mean_wait:.2f} ({c.abs_delta:+.2f} / {c.rel_delta:+.2f}%)")
        lines.append(row)
    widths = [max(len(r[i]) for r in [head] + lines) for i in range(len(head))]
    out = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    out += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in lines]
    return "\n".join(out) + "\n"


def emit_reports(report: ExperimentReport, outdir: Union[str, Path]) -> List[Path]:
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc}") from exc
    cells = [report.cells[k] for k in sorted(report.cells, key=lambda k: (k[0], report.strategies.index(k[1])))]
    waits = outdir / "waits.csv"
    _write_csv(waits, WAITS_HEADER, (
        (f"{c.rate:g}", c.strategy, _fmt(c.mean_wait), _fmt(c.abs_delta), _fmt(c.rel_delta)) for c in cells
    ))
    revenue = outdir / "revenue.csv"
    _write_csv(revenue, REVENUE_HEADER, (
        (f"{c.rate:g}", c.strategy, _fmt(c.taxi_per_1000), _fmt(c.mediator_per_1000), _fmt(c.system_per_1000))
        for c in cells
    ))
    table = outdir / "table.txt"
    with open(table, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(format_table(report) if report.cells else "")
    return [waits, revenue, table]
