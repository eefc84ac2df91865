"""Command line: ``simulate`` one run, ``experiment`` for a grid, ``verify`` self-checks."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .config import ConfigError, ScenarioConfig, load_config
from .dispatch import STRATEGIES
from .engine import SimulationError, run
from .experiment import emit_reports, format_table, run_grid, write_run


def _num_list(text: str) -> List[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part:
            out.append(float(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _seed_list(text: str) -> List[int]:
    """Comma list of seeds; ``a-b`` expands to the inclusive range."""
    out: List[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty seed list")
    return out


def _name_list(text: str) -> List[str]:
    names = [p.strip().lower() for p in text.split(",") if p.strip()]
    bad = [n for n in names if n not in STRATEGIES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown strategy {bad[0]!r}; choose from {', '.join(STRATEGIES)}")
    return names


def _config(path: Optional[str]) -> ScenarioConfig:
    return load_config(path) if path else ScenarioConfig()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="taxidispatch", description="Taxi dispatch simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="one run; writes customers.csv and ledger.csv")
    s.add_argument("--config")
    s.add_argument("--strategy", choices=STRATEGIES)
    s.add_argument("--rate", type=float, help="customers per hour")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--check", action="store_true", help="verify invariants every tick")

    e = sub.add_parser("experiment", help="rate x strategy x seed grid")
    e.add_argument("--config")
    e.add_argument("--rates", type=_num_list, required=True)
    e.add_argument("--strategies", type=_name_list, default=list(STRATEGIES))
    e.add_argument("--seeds", type=_seed_list, default=list(range(10)))
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--out", required=True)
    e.add_argument("--traces", action="store_true", help="also write per-run CSVs under OUT/runs")

    sub.add_parser("verify", help="solver, scenario and invariant self-checks")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "simulate":
            cfg = _config(args.config)
            if args.strategy:
                cfg = replace(cfg, strategy=args.strategy)
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            if args.rate is not None:
                cfg = cfg.with_rate(args.rate)
            m = run(cfg, check_invariants=args.check)
            write_run(m, args.out)
            print(f"strategy={cfg.strategy} seed={cfg.seed} served={m.served_count} "
                  f"avg_wait={m.avg_wait:.4f} min reassignments={m.reassignment_count} "
                  f"rejections={m.rejection_count} mediator={m.mediator_revenue:.4f} EUR")
            return 0
        if args.command == "experiment":
            if args.jobs < 1:
                raise ConfigError("--jobs must be >= 1")
            cfg = _config(args.config)
            trace = Path(args.out) / "runs" if args.traces else None
            report = run_grid(cfg, args.rates, args.strategies, args.seeds, args.jobs, trace)
            emit_reports(report, args.out)
            sys.stdout.write(format_table(report))
            return 0
        from .verify import run_all

        return 0 if run_all() else 1
    except (ConfigError, SimulationError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
