"""
Scenario configuration and its flat ``key = value`` file format.

Every key is optional; missing keys keep the defaults below (Madrid-like
9 x 9 km area, 1000 taxis at 17 km/h, 5 s dispatch tick, 30 s / 90 s dwell,
2.40 EUR flag fall, 1.05 EUR/km fare, 0.20 EUR/km running cost).

    # comment
    n_taxis = 100
    distribution = center
    fare = 1.05          # EUR per km
    op_cost = 0.2        # EUR per km

Monetary rates in the file are per kilometer; internally they are per meter.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Union

from .dispatch import DEFAULT_GAMMA, STRATEGIES
from .fleet import TariffScheme, Timing
from .spatial import AreaSpec, CenterDistParams, DemandSpec, Distribution, kmh_to_ms


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    area: AreaSpec = field(default_factory=AreaSpec)
    n_taxis: int = 1000
    speed: float = 17.0  # km/h
    tick: float = 5.0
    pickup_dwell: float = 30.0
    dropoff_dwell: float = 90.0
    tariff: TariffScheme = field(default_factory=TariffScheme)
    demand: DemandSpec = field(default_factory=DemandSpec)
    center_params: CenterDistParams = field(default_factory=CenterDistParams)
    dest_known: bool = False
    strategy: str = "ntnr"
    gamma: float = DEFAULT_GAMMA
    allow_displacement: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_taxis < 0:
            raise ConfigError("n_taxis must be >= 0")
        for name in ("speed", "tick"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("pickup_dwell", "dropoff_dwell"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")

    @property
    def timing(self) -> Timing:
        return Timing(kmh_to_ms(self.speed), self.pickup_dwell, self.dropoff_dwell)

    def with_rate(self, per_hour: float) -> "ScenarioConfig":
        """Same scenario with demand given in customers per hour."""
        per_interval = per_hour * self.demand.interval / 3600.0
        if abs(per_interval - round(per_interval)) > 1e-9:
            raise ConfigError(
                f"rate {per_hour}/h is not a whole number of customers per {self.demand.interval:g} s interval"
            )
        return replace(self, demand=replace(self.demand, customers_per_interval=int(round(per_interval))))

    def to_flat(self) -> Dict[str, Any]:
        return {
            "area_width": self.area.width,
            "area_height": self.area.height,
            "n_taxis": self.n_taxis,
            "speed": self.speed,
            "tick": self.tick,
            "pickup_dwell": self.pickup_dwell,
            "dropoff_dwell": self.dropoff_dwell,
            "fixed_cost": self.tariff.fixed_cost,
            "fare": self.tariff.fare * 1000.0,
            "op_cost": self.tariff.op_cost * 1000.0,
            "est_trip": self.tariff.est_trip,
            "customers_per_interval": self.demand.customers_per_interval,
            "interval": self.demand.interval,
            "horizon": self.demand.horizon,
            "distribution": self.demand.distribution.value,
            "center_sigma": self.center_params.center_sigma,
            "boundary_sigma": self.center_params.boundary_sigma,
            "outbound_prob": self.center_params.outbound_prob,
            "dest_known": self.dest_known,
            "strategy": self.strategy,
            "gamma": self.gamma,
            "allow_displacement": self.allow_displacement,
            "seed": self.seed,
        }


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


_KEYS: Dict[str, Callable[[str], Any]] = {
    "area_width": float,
    "area_height": float,
    "n_taxis": _parse_int,
    "speed": float,
    "tick": float,
    "pickup_dwell": float,
    "dropoff_dwell": float,
    "fixed_cost": float,
    "fare": float,
    "op_cost": float,
    "est_trip": float,
    "customers_per_interval": _parse_int,
    "rate": float,
    "interval": float,
    "horizon": float,
    "distribution": lambda s: Distribution(s.strip().lower()).value,
    "center_sigma": float,
    "boundary_sigma": float,
    "outbound_prob": float,
    "dest_known": _parse_bool,
    "strategy": lambda s: s.strip().lower(),
    "gamma": float,
    "allow_displacement": _parse_bool,
    "seed": _parse_int,
}


def from_flat(values: Dict[str, Any], base: ScenarioConfig = ScenarioConfig()) -> ScenarioConfig:
    """Build a config from flat keys on top of `base`. Raises ConfigError."""
    unknown = sorted(set(values) - set(_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    flat = base.to_flat()
    flat.update({k: v for k, v in values.items() if k != "rate"})
    if not float(flat["fare"]) > float(flat["op_cost"]) > 0:
        raise ConfigError(
            f"need fare > op_cost > 0 EUR/km (got fare={flat['fare']}, op_cost={flat['op_cost']})"
        )
    try:
        cfg = ScenarioConfig(
            area=AreaSpec(flat["area_width"], flat["area_height"]),
            n_taxis=int(flat["n_taxis"]),
            speed=float(flat["speed"]),
            tick=float(flat["tick"]),
            pickup_dwell=float(flat["pickup_dwell"]),
            dropoff_dwell=float(flat["dropoff_dwell"]),
            tariff=TariffScheme(
                fixed_cost=float(flat["fixed_cost"]),
                fare=float(flat["fare"]) / 1000.0,
                op_cost=float(flat["op_cost"]) / 1000.0,
                est_trip=float(flat["est_trip"]),
            ),
            demand=DemandSpec(
                customers_per_interval=int(flat["customers_per_interval"]),
                interval=float(flat["interval"]),
                horizon=float(flat["horizon"]),
                distribution=Distribution(flat["distribution"]),
            ),
            center_params=CenterDistParams(
                float(flat["center_sigma"]), float(flat["boundary_sigma"]), float(flat["outbound_prob"])
            ),
            dest_known=bool(flat["dest_known"]),
            strategy=str(flat["strategy"]),
            gamma=float(flat["gamma"]),
            allow_displacement=bool(flat["allow_displacement"]),
            seed=int(flat["seed"]),
        )
        if "rate" in values:
            if "customers_per_interval" in values:
                raise ConfigError("give either rate or customers_per_interval, not both")
            cfg = cfg.with_rate(float(values["rate"]))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return from_flat(values)


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), str(path))


def desk_config(**overrides: Any) -> ScenarioConfig:
    """Laptop-sized scenario: 100 taxis on 2.7 x 2.7 km for 45 minutes.

    Lengths (area, center-distribution spreads, trip estimate) are scaled by
    0.3, the fleet by 0.1 and demand to 300 customers/h, Center distribution.
    """
    base = dict(
        area_width=2700.0,
        area_height=2700.0,
        n_taxis=100,
        est_trip=1425.0,
        center_sigma=300.0,
        boundary_sigma=300.0,
        horizon=2700.0,
        customers_per_interval=75,
        distribution="center",
        strategy="combined",
    )
    if "rate" in overrides:
        del base["customers_per_interval"]
    base.update(overrides)
    return from_flat(base)
