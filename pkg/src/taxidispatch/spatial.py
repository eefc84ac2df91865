"""
Geometry, constant-speed motion and customer generation.

All randomness goes through a ``numpy.random.Generator`` backed by PCG64
(``numpy.random.default_rng(seed)``), so a seed reproduces the same demand
on any platform running the same NumPy major version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from .fleet import Customer, Point, interpolate


class Distribution(str, Enum):
    UNIFORM = "uniform"
    CENTER = "center"


@dataclass(frozen=True)
class AreaSpec:
    width: float = 9000.0
    height: float = 9000.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"area must have positive size, got {self.width} x {self.height}")

    @property
    def center(self) -> Point:
        return Point(self.width / 2.0, self.height / 2.0)

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass(frozen=True)
class DemandSpec:
    customers_per_interval: int = 250
    interval: float = 900.0
    horizon: float = 18000.0
    distribution: Distribution = Distribution.UNIFORM

    def __post_init__(self):
        if self.customers_per_interval < 0:
            raise ValueError("customers_per_interval must be >= 0")
        if not (self.interval > 0 and self.horizon > 0):
            raise ValueError("interval and horizon must be positive")
        object.__setattr__(self, "distribution", Distribution(self.distribution))

    @property
    def n_intervals(self) -> int:
        return int(math.ceil(self.horizon / self.interval - 1e-9))

    @property
    def rate_per_hour(self) -> float:
        return self.customers_per_interval * 3600.0 / self.interval


@dataclass(frozen=True)
class CenterDistParams:
    center_sigma: float = 1000.0
    boundary_sigma: float = 1000.0
    outbound_prob: float = 0.5

    def __post_init__(self):
        if not (self.center_sigma > 0 and self.boundary_sigma > 0):
            raise ValueError("sigmas must be positive")
        if not 0.0 <= self.outbound_prob <= 1.0:
            raise ValueError("outbound_prob must lie in [0, 1]")


def distance(a: Point, b: Point) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def travel_time(d: float, speed: float) -> float:
    if speed <= 0:
        raise ValueError(f"speed must be positive, got {speed}")
    return d / speed


def position_at(origin: Point, target: Point, depart: float, speed: float, now: float) -> Point:
    """Linear interpolation along origin->target; `now` must lie in the motion window."""
    return interpolate(origin, target, depart, speed, now)


def kmh_to_ms(kmh: float) -> float:
    return kmh * 1000.0 / 3600.0


def gen_uniform_point(rng: np.random.Generator, area: AreaSpec) -> Point:
    x, y = rng.uniform(0.0, 1.0, size=2)
    return Point(float(x) * area.width, float(y) * area.height)


def _normal_inside(rng: np.random.Generator, area: AreaSpec, mean: Point, sigma: float) -> Point:
    # rejection, not clipping: clipping would pile mass on the border
    while True:
        x, y = rng.normal(0.0, sigma, size=2)
        x = mean.x + float(x)
        y = mean.y + float(y)
        if area.contains(x, y):
            return Point(x, y)


def _boundary_point(rng: np.random.Generator, area: AreaSpec) -> Point:
    w, h = area.width, area.height
    s = float(rng.uniform(0.0, 2.0 * (w + h)))
    if s < w:
        return Point(s, 0.0)
    s -= w
    if s < h:
        return Point(w, s)
    s -= h
    if s < w:
        return Point(w - s, h)
    return Point(0.0, h - (s - w))


def _outside_point(rng: np.random.Generator, area: AreaSpec, sigma: float) -> Point:
    while True:
        anchor = _boundary_point(rng, area)
        x, y = rng.normal(0.0, sigma, size=2)
        x = anchor.x + float(x)
        y = anchor.y + float(y)
        if area.contains(x, y):
            return Point(x, y)


def gen_center_trip(
    rng: np.random.Generator, area: AreaSpec, params: CenterDistParams
) -> Tuple[Point, Point]:
    """One trip between the city center and its outskirts.

    With probability ``outbound_prob`` the trip leaves the center, otherwise
    it heads into it. Returns (origin, destination).
    """
    outbound = bool(rng.uniform() < params.outbound_prob)
    center = _normal_inside(rng, area, area.center, params.center_sigma)
    outside = _outside_point(rng, area, params.boundary_sigma)
    return (center, outside) if outbound else (outside, center)


def gen_trip(
    rng: np.random.Generator, area: AreaSpec, distribution: Distribution, params: CenterDistParams
) -> Tuple[Point, Point]:
    if distribution is Distribution.UNIFORM:
        return gen_uniform_point(rng, area), gen_uniform_point(rng, area)
    if distribution is Distribution.CENTER:
        return gen_center_trip(rng, area, params)
    raise ValueError(f"unknown distribution {distribution!r}")


def gen_demand(
    rng: np.random.Generator,
    demand: DemandSpec,
    area: AreaSpec = AreaSpec(),
    params: CenterDistParams = CenterDistParams(),
    dest_known: bool = False,
) -> List[Customer]:
    """Exactly ``customers_per_interval`` requests per interval up to the horizon.

    Request times are uniform inside each interval. Ids follow arrival order.
    """
    drafts = []
    for k in range(demand.n_intervals):
        start = k * demand.interval
        end = min(start + demand.interval, demand.horizon)
        for _ in range(demand.customers_per_interval):
            t = float(rng.uniform(start, end))
            origin, dest = gen_trip(rng, area, demand.distribution, params)
            drafts.append((t, origin, dest))
    drafts.sort(key=lambda d: d[0])  # stable: equal times keep generation order
    return [
        Customer(id=i, request_time=t, origin=o, destination=d, dest_known=dest_known)
        for i, (t, o, d) in enumerate(drafts)
    ]


def points_xy(points) -> np.ndarray:
    """Stack Points into an (n, 2) float array."""
    arr = np.array([(p.x, p.y) for p in points], dtype=np.float64)
    return arr.reshape(-1, 2)


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distances between rows of `a` (n, 2) and rows of `b` (m, 2)."""
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
