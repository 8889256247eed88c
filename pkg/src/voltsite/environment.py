"""Placement environment: candidate states, composite actions, hybrid rewards.

A world holds the current station set and the Voronoi-vertex candidates
around it.  ``step`` places one station at a candidate with a homogeneous
block of ports, recomputes the candidates and (optionally) simulates the
enlarged network to score the placement.
"""
from __future__ import annotations

import csv
import io
from collections import OrderedDict
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .catalog import DEFAULT_CATALOG, PortCatalog
from .errors import ContractViolation
from .geodata import Point, PopulationRaster, Scenario, StationSite, density_at
from .simulator import SimulationConfig, SimulationResult
from .simulator import run as simulate
from .voronoi import DEFAULT_MIN_SEPARATION_KM, voronoi_candidates

__all__ = [
    "PortCatalog", "StateVector", "Action", "RewardWeights", "RewardBreakdown", "EnvConfig",
    "World", "PlacementEnv", "observe", "observe_all", "reward_pop", "reward_exist",
    "reward_sub", "reward_wait", "reset", "step",
]

SINGLE_RANDOM = "single_random"
EXISTING_SET = "existing_set"


@dataclass(frozen=True)
class StateVector:
    d_nearest: float
    d_nearest_sub: float
    rho: float
    n_stations: int
    t_avg: float

    def as_tuple(self) -> tuple[float, float, float, int, float]:
        return (self.d_nearest, self.d_nearest_sub, self.rho, self.n_stations, self.t_avg)


@dataclass(frozen=True)
class Action:
    loc: int
    port: int


@dataclass(frozen=True)
class RewardWeights:
    w_pop: float = 10.0
    w_exist: float = 10.0
    w_sub: float = 10.0
    w_wait: float = 10.0
    d_min: float = 1.0
    tau_scale: float = 10.0
    radius_km: float = 2.0
    exist_reward_form: str = "prose"

    def __post_init__(self):
        if min(self.w_pop, self.w_exist, self.w_sub, self.w_wait, self.tau_scale, self.radius_km) <= 0:
            raise ContractViolation("reward weights, tau_scale and radius must be > 0")
        if self.d_min < 0:
            raise ContractViolation("d_min must be >= 0")
        if self.exist_reward_form not in ("prose", "formula"):
            raise ContractViolation("exist_reward_form must be 'prose' or 'formula'")


@dataclass(frozen=True)
class RewardBreakdown:
    r_pop: float
    r_exist: float
    r_sub: float
    r_wait: float

    @property
    def total(self) -> float:
        return self.r_pop + self.r_exist + self.r_sub + self.r_wait

    @property
    def deterministic(self) -> float:
        return self.r_pop + self.r_exist + self.r_sub


# --------------------------------------------------------------------------- rewards


def reward_pop(rho: float, rho_max: float, weights: RewardWeights = RewardWeights()) -> float:
    if rho_max <= 0:
        raise ContractViolation("rho_max must be > 0")
    return rho / rho_max * weights.w_pop


def reward_exist(d_nearest: float, weights: RewardWeights = RewardWeights()) -> float:
    """Spacing reward: zero inside ``d_min`` then decreasing linearly with distance.

    The ``formula`` form subtracts ``d_min`` everywhere instead of gating on it.
    """
    if weights.exist_reward_form == "formula":
        return max(0.0, weights.w_exist - d_nearest - weights.d_min)
    if d_nearest < weights.d_min:
        return 0.0
    return max(0.0, weights.w_exist - d_nearest)


def reward_sub(d_sub: float, weights: RewardWeights = RewardWeights()) -> float:
    return max(0.0, weights.w_sub - d_sub)


def reward_wait(t_avg: float, weights: RewardWeights = RewardWeights()) -> float:
    if t_avg <= 0:
        return weights.w_wait
    return min(weights.w_wait, weights.tau_scale / t_avg)


# --------------------------------------------------------------------------- state


def _pairwise(scenario: Scenario | None, a: Sequence[Point], b: Sequence[Point]) -> np.ndarray:
    if scenario is None or scenario.coordinate_mode == "planar":
        ax = np.array([[p.x, p.y] for p in a], dtype=float).reshape(-1, 2)
        bx = np.array([[p.x, p.y] for p in b], dtype=float).reshape(-1, 2)
        return np.hypot(ax[:, None, 0] - bx[None, :, 0], ax[:, None, 1] - bx[None, :, 1])
    return np.array([[scenario.distance(p, q) for q in b] for p in a], dtype=float).reshape(len(a), len(b))


def observe_all(
    candidates: Sequence[Point],
    stations: Sequence[StationSite],
    substations: Sequence[Point],
    raster: PopulationRaster,
    sim_result: SimulationResult | None,
    weights: RewardWeights = RewardWeights(),
    scenario: Scenario | None = None,
) -> list[StateVector]:
    """Feature vectors for every candidate at once.

    ``t_avg`` is the mean of the simulated per-station waits of stations within
    the neighbourhood radius, falling back to the system mean wait when none of
    them has simulation data; it is 0 when there is no simulation at all.
    """
    if not stations:
        raise ContractViolation("observe needs at least one station")
    if not substations:
        raise ContractViolation("observe needs at least one substation")
    if not candidates:
        return []
    d_st = _pairwise(scenario, candidates, [s.location for s in stations])
    d_sub = _pairwise(scenario, candidates, substations).min(axis=1)
    waits = sim_result.station_mean_waits() if sim_result is not None else {}
    w = np.array([waits.get(s.id, np.nan) for s in stations])
    system = sim_result.mean_wait if sim_result is not None else 0.0
    out = []
    for i, p in enumerate(candidates):
        near = d_st[i] <= weights.radius_km
        local = w[near]
        local = local[~np.isnan(local)]
        t_avg = float(local.mean()) if local.size else float(system)
        out.append(StateVector(
            d_nearest=float(d_st[i].min()),
            d_nearest_sub=float(d_sub[i]),
            rho=density_at(raster, p),
            n_stations=int(near.sum()),
            t_avg=t_avg,
        ))
    return out


def observe(
    candidate: Point,
    stations: Sequence[StationSite],
    substations: Sequence[Point],
    raster: PopulationRaster,
    sim_result: SimulationResult | None,
    weights: RewardWeights = RewardWeights(),
    scenario: Scenario | None = None,
) -> StateVector:
    return observe_all([candidate], stations, substations, raster, sim_result, weights, scenario)[0]


def deterministic_reward(state: StateVector, rho_max: float, weights: RewardWeights = RewardWeights()) -> float:
    return (reward_pop(state.rho, rho_max, weights) + reward_exist(state.d_nearest, weights)
            + reward_sub(state.d_nearest_sub, weights))


# --------------------------------------------------------------------------- world


@dataclass(frozen=True)
class EnvConfig:
    ports_per_station: int = 4
    min_separation_km: float = DEFAULT_MIN_SEPARATION_KM
    weights: RewardWeights = field(default_factory=RewardWeights)
    use_simulation: bool = True
    wait_source: str = "post_system"  # or "pre_local"
    reset_mode: str = EXISTING_SET
    sim_config: SimulationConfig = field(default_factory=SimulationConfig)
    sim_seed: int = 0
    cache_size: int = 4096

    def __post_init__(self):
        if self.ports_per_station < 1:
            raise ContractViolation("ports_per_station must be >= 1")
        if self.wait_source not in ("post_system", "pre_local"):
            raise ContractViolation("wait_source must be 'post_system' or 'pre_local'")
        if self.reset_mode not in (SINGLE_RANDOM, EXISTING_SET):
            raise ContractViolation(f"reset_mode must be {SINGLE_RANDOM!r} or {EXISTING_SET!r}")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["sim_config"] = self.sim_config.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "EnvConfig":
        doc = dict(doc)
        if "weights" in doc:
            doc["weights"] = RewardWeights(**doc["weights"])
        if "sim_config" in doc:
            doc["sim_config"] = SimulationConfig.from_dict(doc["sim_config"])
        return cls(**doc)


@dataclass
class World:
    scenario: Scenario
    stations: list[StationSite]
    candidates: list[Point]
    states: list[StateVector]
    sim_result: SimulationResult | None
    n_placed: int = 0

    @property
    def station_points(self) -> list[Point]:
        return [s.location for s in self.stations]


@dataclass
class StepResult:
    candidates: list[Point]
    states: list[StateVector]
    reward: RewardBreakdown
    sim_result: SimulationResult | None
    chosen: Point
    chosen_state: StateVector


class PlacementEnv:
    """Environment wrapper that owns a world and a simulation cache."""

    def __init__(self, scenario: Scenario, config: EnvConfig = EnvConfig(),
                 catalog: PortCatalog = DEFAULT_CATALOG):
        self.scenario = scenario
        self.config = config
        self.catalog = catalog
        self.world: World | None = None
        self._cache: OrderedDict = OrderedDict()
        self._cand_cache: dict[tuple, list[Point]] = {}
        self.sim_calls = 0

    # simulation results depend only on the station set for a fixed config and seed
    def simulate(self, stations: Sequence[StationSite]) -> SimulationResult:
        key = tuple((s.id, s.location.x, s.location.y, s.ports) for s in stations)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        self.sim_calls += 1
        res = simulate(self.scenario, stations, self.config.sim_config, seed=self.config.sim_seed)
        res.sessions = []  # keep cached entries small
        self._cache[key] = res
        if len(self._cache) > self.config.cache_size:
            self._cache.popitem(last=False)
        return res

    def _candidates(self, stations: Sequence[StationSite]) -> list[Point]:
        pts = tuple(s.location for s in stations)
        cands = self._cand_cache.get(pts)
        if cands is None:
            cands = voronoi_candidates(pts, self.scenario.domain, self.config.min_separation_km)
            if not cands:
                raise ContractViolation("no candidate vertices left around the current stations")
            if len(self._cand_cache) >= self.config.cache_size:
                self._cand_cache.clear()
            self._cand_cache[pts] = cands
        return list(cands)

    def _states(self, cands, stations, sim_result) -> list[StateVector]:
        return observe_all(cands, stations, self.scenario.substations, self.scenario.raster,
                           sim_result, self.config.weights, self.scenario)

    def reset(self, seed: int = 0, mode: str | None = None) -> World:
        mode = mode or self.config.reset_mode
        if mode == SINGLE_RANDOM:
            rng = np.random.default_rng(seed)
            d = self.scenario.domain
            p = Point(float(rng.uniform(d.xmin, d.xmax)), float(rng.uniform(d.ymin, d.ymax)))
            j = int(rng.choice(np.arange(1, 11), p=self.catalog.probabilities()))
            stations = [StationSite("R0", p, ((j, self.config.ports_per_station),))]
        elif mode == EXISTING_SET:
            stations = list(self.scenario.existing_stations)
            if not stations:
                raise ContractViolation("scenario has no existing stations to start from")
        else:
            raise ContractViolation(f"unknown reset mode {mode!r}")
        sim_result = self.simulate(stations) if self.config.use_simulation else None
        cands = self._candidates(stations)
        self.world = World(self.scenario, stations, cands, self._states(cands, stations, sim_result), sim_result)
        return self.world

    def step(self, action: Action) -> StepResult:
        w = self.world
        if w is None:
            raise ContractViolation("step called before reset")
        if not 0 <= action.loc < len(w.candidates):
            raise ContractViolation(f"location index {action.loc} outside 0..{len(w.candidates) - 1}")
        self.catalog.check_type(action.port)
        weights = self.config.weights
        chosen, pre = w.candidates[action.loc], w.states[action.loc]
        site = StationSite(f"N{w.n_placed}", chosen, ((int(action.port), self.config.ports_per_station),))
        stations = w.stations + [site]
        sim_result = self.simulate(stations) if self.config.use_simulation else w.sim_result
        if self.config.use_simulation and self.config.wait_source == "post_system":
            r_wait = reward_wait(sim_result.mean_wait, weights)
        else:
            r_wait = reward_wait(pre.t_avg, weights)
        reward = RewardBreakdown(
            reward_pop(pre.rho, self.scenario.rho_max, weights),
            reward_exist(pre.d_nearest, weights),
            reward_sub(pre.d_nearest_sub, weights),
            r_wait,
        )
        cands = self._candidates(stations)
        states = self._states(cands, stations, sim_result)
        self.world = World(self.scenario, stations, cands, states, sim_result, w.n_placed + 1)
        return StepResult(cands, states, reward, sim_result, chosen, pre)


def reset(scenario: Scenario, mode: str = SINGLE_RANDOM, seed: int = 0,
          config: EnvConfig = EnvConfig()) -> PlacementEnv:
    env = PlacementEnv(scenario, replace(config, reset_mode=mode))
    env.reset(seed, mode)
    return env


def step(env: PlacementEnv, action: Action) -> StepResult:
    return env.step(action)


TRACE_COLUMNS = ("step", "candidate_x", "candidate_y", "port_type", "r_pop", "r_exist",
                 "r_sub", "r_wait", "total", "sim_mean_wait")


def reward_trace_csv(rows: Sequence[tuple[int, StepResult, int]]) -> str:
    """CSV of (step index, step result, port type) rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for k, res, port in rows:
        r = res.reward
        mw = res.sim_result.mean_wait if res.sim_result is not None else ""
        w.writerow([k, res.chosen.x, res.chosen.y, port, r.r_pop, r.r_exist, r.r_sub, r.r_wait, r.total, mw])
    return buf.getvalue()
