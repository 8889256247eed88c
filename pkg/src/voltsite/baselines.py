"""Static placement baselines and port-type assignment rules."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .catalog import DEFAULT_CATALOG, PortCatalog
from .environment import Action, EnvConfig, PlacementEnv, RewardWeights, deterministic_reward
from .errors import ContractViolation, InfeasibleError
from .geodata import Point, PopulationRaster, Scenario, StationSite, density_at


@dataclass(frozen=True)
class PlannedStation:
    location: Point
    port_type: int
    port_count: int


@dataclass
class PlacementPlan:
    stations: list[PlannedStation] = field(default_factory=list)
    method: str = ""
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.stations)

    @property
    def points(self) -> list[Point]:
        return [s.location for s in self.stations]

    def sites(self, prefix: str = "P") -> list[StationSite]:
        return [StationSite(f"{prefix}{i}", s.location, ((s.port_type, s.port_count),))
                for i, s in enumerate(self.stations)]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "stations": [{"x": s.location.x, "y": s.location.y, "port_type": s.port_type,
                          "port_count": s.port_count} for s in self.stations],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlacementPlan":
        return cls([PlannedStation(Point(float(s["x"]), float(s["y"])), int(s["port_type"]),
                                   int(s["port_count"])) for s in d["stations"]],
                   d.get("method", ""), d.get("seed"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def with_ports(points: Sequence[Point], port_types: Sequence[int], port_count: int,
               method: str, seed: int | None) -> PlacementPlan:
    return PlacementPlan([PlannedStation(p, int(j), port_count) for p, j in zip(points, port_types)],
                         method, seed)


# --------------------------------------------------------------------------- locations


def place_voronoi_greedy(scenario: Scenario, k: int, weights: RewardWeights | None = None,
                         env_config: EnvConfig | None = None, port_type: int = 5) -> PlacementPlan:
    """Repeatedly add the Voronoi candidate with the highest deterministic reward.

    Only locations matter here; ``port_type`` is a placeholder that callers
    normally overwrite with one of the assignment rules.
    """
    if k < 0:
        raise ContractViolation("k must be >= 0")
    cfg = env_config if env_config is not None else EnvConfig()
    if weights is not None:
        cfg = replace(cfg, weights=weights)
    env = PlacementEnv(scenario, replace(cfg, use_simulation=False, reset_mode="existing_set"))
    world = env.reset()
    planned = []
    for _ in range(k):
        vals = [deterministic_reward(s, scenario.rho_max, cfg.weights) for s in world.states]
        res = env.step(Action(int(np.argmax(vals)), port_type))
        planned.append(PlannedStation(res.chosen, port_type, cfg.ports_per_station))
        world = env.world
    return PlacementPlan(planned, "voronoi", None)


def place_radial(scenario: Scenario, k: int, seed: int = 0, port_type: int = 5,
                 port_count: int = 4) -> PlacementPlan:
    """Points on three rings around the domain centre, filled inside out.

    Ring radii are 1/3, 2/3 and 1 times half the domain diagonal.  Points on a
    ring are evenly spaced in angle from a seeded random phase; points that
    fall outside the domain are clipped onto its boundary.
    """
    if k < 0:
        raise ContractViolation("k must be >= 0")
    d = scenario.domain
    c = d.center
    r_max = 0.5 * math.hypot(d.width, d.height)
    radii = [r_max / 3, 2 * r_max / 3, r_max]
    # ring capacities grow with circumference; the last ring takes the remainder
    base = max(1, math.ceil(k / 6))
    counts = [base, 2 * base]
    counts.append(max(0, k - sum(counts)))
    rng = np.random.default_rng(seed)
    phase = float(rng.uniform(0, 2 * math.pi))
    points = []
    remaining = k
    for r, n in zip(radii, counts):
        n = min(n, remaining)
        for i in range(n):
            a = phase + 2 * math.pi * i / n
            points.append(d.clip(Point(c.x + r * math.cos(a), c.y + r * math.sin(a))))
        remaining -= n
    return with_ports(points, [port_type] * len(points), port_count, "radial", seed)


def place_probabilistic(scenario: Scenario, k: int, seed: int = 0, port_type: int = 5,
                        port_count: int = 4) -> PlacementPlan:
    """Cell centres drawn without replacement with probability proportional to density."""
    if k < 0:
        raise ContractViolation("k must be >= 0")
    raster = scenario.raster
    w = raster.cells.ravel()
    positive = int(np.count_nonzero(w > 0))
    if k > positive:
        raise InfeasibleError(f"k={k} exceeds the {positive} positive-density cells")
    rng = np.random.default_rng(seed)
    idx = rng.choice(w.size, size=k, replace=False, p=w / w.sum()) if k else []
    points = [raster.cell_center(*divmod(int(i), raster.cols)) for i in idx]
    return with_ports(points, [port_type] * len(points), port_count, "probabilistic", seed)


# --------------------------------------------------------------------------- ports


def assign_ports_random(k: int, catalog: PortCatalog = DEFAULT_CATALOG, seed: int = 0) -> list[int]:
    rng = np.random.default_rng(seed)
    return [int(j) for j in rng.choice(np.arange(1, 11), size=k, p=catalog.probabilities())]


def density_port_probabilities(rho: float, rho_max: float, catalog: PortCatalog = DEFAULT_CATALOG) -> np.ndarray:
    """Frequency distribution tilted toward powerful ports as density rises.

    P(j) is proportional to pt_j * (power_j / max_power) ** (rho / rho_max).
    """
    if rho_max <= 0:
        raise ContractViolation("rho_max must be > 0")
    power = np.asarray(catalog.powers_kw, dtype=float)
    w = np.asarray(catalog.frequencies, dtype=float) * (power / power.max()) ** (rho / rho_max)
    return w / w.sum()


def assign_ports_density(locations: Sequence[Point], raster: PopulationRaster,
                         catalog: PortCatalog = DEFAULT_CATALOG, seed: int = 0) -> list[int]:
    rng = np.random.default_rng(seed)
    out = []
    for p in locations:
        probs = density_port_probabilities(density_at(raster, p), raster.rho_max, catalog)
        out.append(int(rng.choice(np.arange(1, 11), p=probs)))
    return out


PORT_STRATEGIES = ("random", "density")


def assign_ports(plan: PlacementPlan, strategy: str, scenario: Scenario, seed: int = 0,
                 port_count: int = 4) -> PlacementPlan:
    if strategy == "random":
        types = assign_ports_random(len(plan), seed=seed)
    elif strategy == "density":
        types = assign_ports_density(plan.points, scenario.raster, seed=seed)
    else:
        raise ContractViolation(f"unknown port strategy {strategy!r}")
    return with_ports(plan.points, types, port_count, f"{plan.method}/{strategy}", seed)
