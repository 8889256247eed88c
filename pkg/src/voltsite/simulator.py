"""Agent-based EV mobility and charging simulation over a fixed horizon.

Time advances in fixed ticks.  During tick ``t`` (covering ``[t*dt, (t+1)*dt]``)
stations first advance their charging sessions in continuous time, then the
vehicles that have something to do in this tick are processed in id order.
Driving is piecewise linear between events, so a driving vehicle is only
touched on the tick where it arrives, crosses an SoC threshold or runs flat;
its state matches what stepping it every tick would give.
"""
from __future__ import annotations

import csv
import heapq
import io
import json
import math
from bisect import bisect_right
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .catalog import DEFAULT_CATALOG, PortCatalog
from .errors import ConfigurationError, ContractViolation
from .geodata import Point, Scenario, StationSite, VehicleSpec

# named RNG sub-streams
STREAM_VEHICLE_INIT = 0
STREAM_DECISIONS = 1
STREAM_DESTINATIONS = 2

DRIVING = "driving"
SEEKING = "seeking"
QUEUED = "queued"
CHARGING = "charging"
IDLE = "idle"
STRANDED = "stranded"

START_SEEKING = "start_seeking"
KEEP_DRIVING = "keep_driving"
STOP = "stop"
CONTINUE_TO_FULL = "continue_to_full"

EVENT_COLUMNS = ("tick", "vehicle_id", "event", "station_id", "soc", "wait_hours")


@dataclass(frozen=True)
class SimulationConfig:
    duration_h: float = 24.0
    tick_s: float = 60.0
    soc_consider_threshold: float = 0.30
    soc_stop_threshold: float = 0.80
    p_charge_at_30: float = 0.5
    p_stop_at_80: float = 0.5
    soc_forced_threshold: float = 0.10
    min_trip_km: float = 1.0
    queue_factor: float = 2.0
    speed_kmh: tuple[float, float] = (40.0, 50.0)
    initial_soc: tuple[float, float] = (0.2, 1.0)
    dwell_h: tuple[float, float] = (0.1, 0.5)
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.soc_forced_threshold < self.soc_consider_threshold
                < self.soc_stop_threshold <= 1):
            raise ConfigurationError(
                "need 0 < soc_forced_threshold < soc_consider_threshold < soc_stop_threshold <= 1")
        if self.duration_h <= 0 or self.tick_s <= 0:
            raise ConfigurationError("duration_h and tick_s must be positive")
        for name in ("p_charge_at_30", "p_stop_at_80"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must be a probability")
        lo, hi = self.speed_kmh
        if not 0 < lo <= hi:
            raise ConfigurationError("speed_kmh must be a positive (low, high) range")
        lo, hi = self.initial_soc
        if not 0 <= lo <= hi <= 1:
            raise ConfigurationError("initial_soc must lie in [0, 1]")
        lo, hi = self.dwell_h
        if not 0 <= lo <= hi:
            raise ConfigurationError("dwell_h must be a non-negative range")
        if self.queue_factor < 0 or self.min_trip_km < 0:
            raise ConfigurationError("queue_factor and min_trip_km must be >= 0")

    @property
    def tick_h(self) -> float:
        return self.tick_s / 3600.0

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration_h * 3600.0 / self.tick_s))

    @classmethod
    def from_dict(cls, doc: dict) -> "SimulationConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(f"unknown simulation config field(s): {sorted(unknown)}")
        doc = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
        return cls(**doc)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def charging_duration(capacity_kwh: float, soc_from: float, soc_to: float, power_kw: float) -> float:
    """Hours to charge linearly from ``soc_from`` to ``soc_to`` at constant power."""
    if not 0.0 <= soc_from < soc_to <= 1.0:
        raise ContractViolation(f"need 0 <= soc_from < soc_to <= 1, got {soc_from}, {soc_to}")
    if power_kw <= 0:
        raise ContractViolation("power must be positive")
    return capacity_kwh * (soc_to - soc_from) / power_kw


# --------------------------------------------------------------------------- agents


@dataclass
class Port:
    type_index: int
    power: float
    occupant: int | None = None
    # session bookkeeping
    target: float = 1.0
    pending_stop: bool = False
    cursor: float = 0.0
    session: int = -1


@dataclass
class ChargingStation:
    id: str
    location: Point
    ports: list[Port]
    queue_capacity: int
    queue: deque = field(default_factory=deque)

    @classmethod
    def from_site(cls, site: StationSite, queue_factor: float = 2.0,
                  catalog: PortCatalog = DEFAULT_CATALOG) -> "ChargingStation":
        ports = [Port(j, catalog.power(j)) for j, count in site.ports for _ in range(count)]
        return cls(site.id, site.location, ports, math.ceil(queue_factor * len(ports)))

    def free_port(self) -> int | None:
        """Index of the free port with the highest power (lowest index on ties)."""
        best = None
        for i, p in enumerate(self.ports):
            if p.occupant is None and (best is None or p.power > self.ports[best].power):
                best = i
        return best


class VehicleState:
    __slots__ = (
        "id", "spec", "soc", "speed", "mode", "declined_30_flag", "decided_30",
        "wait_clock", "position", "node", "building", "destination", "target_station",
        "rejected", "route_x", "route_y", "route_cum", "route_nodes", "route_total",
        "anchor_tick", "anchor_travel", "anchor_soc", "queued_at", "session_start_soc",
        "station", "km_driven",
    )

    def __init__(self, vid: int, spec: VehicleSpec, soc: float, speed: float, position: Point):
        self.id = vid
        self.spec = spec
        self.soc = soc
        self.speed = speed
        self.mode = IDLE
        self.declined_30_flag = False
        self.decided_30 = False
        self.wait_clock = 0.0
        self.position = position
        self.node = -1
        self.building = -1
        self.destination = -1
        self.target_station = -1
        self.rejected: set[int] = set()
        self.route_x = self.route_y = self.route_cum = None
        self.route_nodes = None
        self.route_total = 0.0
        self.anchor_tick = 0
        self.anchor_travel = 0.0
        self.anchor_soc = soc
        self.queued_at = 0.0
        self.session_start_soc = soc
        self.station = -1
        self.km_driven = 0.0


def decide_charging(v: VehicleState, config: SimulationConfig, rng: np.random.Generator) -> str:
    """Charging decision while driving.

    At or below the forced threshold the vehicle always seeks.  On the first
    crossing of the consider threshold it seeks with probability
    ``p_charge_at_30``; a vehicle that declines keeps driving until forced.
    """
    if v.soc <= config.soc_forced_threshold:
        return START_SEEKING
    if not v.decided_30 and v.soc <= config.soc_consider_threshold:
        v.decided_30 = True
        if rng.random() < config.p_charge_at_30:
            return START_SEEKING
        v.declined_30_flag = True
    return KEEP_DRIVING


def stop_decision(v: VehicleState, config: SimulationConfig, rng: np.random.Generator) -> str:
    return STOP if rng.random() < config.p_stop_at_80 else CONTINUE_TO_FULL


def pick_destination(road_km: np.ndarray, min_trip_km: float, rng: np.random.Generator,
                     current: int = -1) -> int:
    """Uniform choice among buildings at least ``min_trip_km`` away by road.

    ``road_km[i]`` is the road distance to building ``i``; ``current`` (the
    building the vehicle stands at, if any) is never chosen.  When nothing
    qualifies the farthest building is returned.
    """
    d = np.asarray(road_km, dtype=float)
    ok = d >= min_trip_km
    if current >= 0:
        ok[current] = False
    idx = np.flatnonzero(ok)
    if idx.size:
        return int(idx[rng.integers(idx.size)])
    far = d.copy()
    if current >= 0 and d.size > 1:
        far[current] = -np.inf
    return int(np.argmax(far))


def arrive_at_station(station: ChargingStation, vehicle_id: int) -> tuple[str, int | None]:
    """Admit a vehicle: best free port, else the queue tail, else rejection."""
    k = station.free_port()
    if k is not None:
        station.ports[k].occupant = vehicle_id
        return CHARGING, k
    if len(station.queue) < station.queue_capacity:
        station.queue.append(vehicle_id)
        return QUEUED, len(station.queue) - 1
    return "rejected", None


# --------------------------------------------------------------------------- results


@dataclass
class StationStats:
    id: str
    mean_wait: float
    arrivals: int
    rejections: int
    completed: int
    charging_hours: float


@dataclass
class SimulationResult:
    waits: list[float]
    wait_records: list[tuple[int, str, float]]
    station_stats: list[StationStats]
    total_charging_hours: float
    mean_wait: float
    n_sessions: int
    stranded: int
    censored_waits: list[float]
    sessions: list[dict] = field(default_factory=list)
    events: list[tuple] | None = None

    def station_mean_waits(self) -> dict[str, float]:
        return {s.id: s.mean_wait for s in self.station_stats}

    def to_dict(self, include_events: bool = False) -> dict:
        doc = {
            "mean_wait": self.mean_wait,
            "n_sessions": self.n_sessions,
            "total_charging_hours": self.total_charging_hours,
            "stranded": self.stranded,
            "waits": self.waits,
            "wait_records": [list(r) for r in self.wait_records],
            "censored_waits": self.censored_waits,
            "stations": [asdict(s) for s in self.station_stats],
        }
        if include_events and self.events is not None:
            doc["events"] = [list(e) for e in self.events]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def events_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for e in self.events or []:
            w.writerow(e)
        return buf.getvalue()


# --------------------------------------------------------------------------- engine


class Simulation:
    """One seeded run.  Construct, then call :meth:`run`."""

    def __init__(self, scenario: Scenario, stations: Sequence[StationSite], config: SimulationConfig,
                 seed: int | None = None, record_events: bool = False,
                 catalog: PortCatalog = DEFAULT_CATALOG,
                 observer: Callable[["Simulation", int], None] | None = None):
        if not stations:
            raise ConfigurationError("simulation needs at least one station")
        self.scenario = scenario
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.stations = [ChargingStation.from_site(s, config.queue_factor, catalog) for s in stations]
        if sum(len(s.ports) for s in self.stations) == 0:
            raise ConfigurationError("stations have zero ports in total")
        self.record_events = record_events
        self.events: list[tuple] = []
        self.observer = observer
        self.dt = config.tick_h
        self.n_ticks = config.n_ticks
        self.tick = 0

        self.rng_init = np.random.default_rng([self.seed, STREAM_VEHICLE_INIT])
        self.rng_dec = np.random.default_rng([self.seed, STREAM_DECISIONS])
        self.rng_dest = np.random.default_rng([self.seed, STREAM_DESTINATIONS])

        roads = scenario.roads
        self.roads = roads
        self.node_xy = roads.coords
        self.b_xy = np.array([[p.x, p.y] for p in scenario.buildings])
        self.b_node = np.array([roads.nearest_node(p) for p in scenario.buildings], dtype=np.int64)
        self.b_leg = np.array([scenario.distance(p, roads.nodes[n])
                               for p, n in zip(scenario.buildings, self.b_node)])
        self.s_xy = np.array([[s.location.x, s.location.y] for s in self.stations])
        self.s_node = np.array([roads.nearest_node(s.location) for s in self.stations], dtype=np.int64)
        self.s_leg = np.array([scenario.distance(s.location, roads.nodes[n])
                               for s, n in zip(self.stations, self.s_node)])
        self._dist_rows: dict[int, np.ndarray] = {}

        self.wait_records: list[tuple[int, str, float]] = []
        self.sessions: list[dict] = []
        self.st_arrivals = [0] * len(self.stations)
        self.st_rejections = [0] * len(self.stations)
        self.st_completed = [0] * len(self.stations)
        self.st_waits: list[list[float]] = [[] for _ in self.stations]
        self.stranded = 0
        self.schedule: dict[int, set[int]] = {}
        self.busy: set[int] = set()
        self.vehicles = self._init_vehicles()

    # -- helpers ---------------------------------------------------------------

    def _log(self, vid: int, event: str, station: int = -1, soc: float = float("nan"), wait: float = 0.0):
        if self.record_events:
            sid = self.stations[station].id if station >= 0 else ""
            self.events.append((self.tick, vid, event, sid, soc, wait))

    def _road_row(self, node: int) -> np.ndarray:
        row = self._dist_rows.get(node)
        if row is None:
            row = self.roads.distances_from(node)
            self._dist_rows[node] = row
        return row

    def _due(self, tick: int, vid: int) -> None:
        if tick < self.n_ticks:
            self.schedule.setdefault(tick, set()).add(vid)

    def _straight(self, xy: np.ndarray, p: Point) -> np.ndarray:
        if self.scenario.coordinate_mode == "planar":
            return np.hypot(xy[:, 0] - p.x, xy[:, 1] - p.y)
        return np.array([self.scenario.distance(p, Point(float(a), float(b))) for a, b in xy])

    def _init_vehicles(self) -> list[VehicleState]:
        cfg = self.config
        vehicles = []
        specs = [f.spec for f in self.scenario.fleet for _ in range(f.count)]
        for vid, spec in enumerate(specs):
            b = int(self.rng_init.integers(len(self.scenario.buildings)))
            soc = float(self.rng_init.uniform(*cfg.initial_soc))
            speed = float(self.rng_init.uniform(*cfg.speed_kmh))
            v = VehicleState(vid, spec, soc, speed, self.scenario.buildings[b])
            v.building = b
            v.node = int(self.b_node[b])
            vehicles.append(v)
        for v in vehicles:
            self._start_trip_to_building(v, start_tick=0)
        return vehicles

    # -- routing ---------------------------------------------------------------

    def _anchor(self, v: VehicleState) -> tuple[int, float]:
        """Road node to leave from and the straight leg to reach it."""
        if v.route_x is None or v.mode not in (DRIVING, SEEKING):
            if v.building >= 0:
                return int(self.b_node[v.building]), float(self.b_leg[v.building])
            if v.station >= 0:
                return int(self.s_node[v.station]), float(self.s_leg[v.station])
            node = self.roads.nearest_node(v.position)
            return node, self.scenario.distance(v.position, self.roads.nodes[node])
        travel = min(v.route_total, v.anchor_travel)
        k = min(bisect_right(v.route_cum, travel) - 1, len(v.route_cum) - 2)
        nxt = v.route_nodes[k + 1]
        node = int(nxt) if nxt >= 0 else int(v.route_nodes[k])
        return node, self.scenario.distance(v.position, self.roads.nodes[node])

    def _set_route(self, v: VehicleState, start: Point, anchor: int, leg: float,
                   dest_node: int, dest: Point, dest_leg: float) -> None:
        path, _ = self.roads.shortest_path(anchor, dest_node)
        xs = [start.x] + [self.roads.nodes[n].x for n in path] + [dest.x]
        ys = [start.y] + [self.roads.nodes[n].y for n in path] + [dest.y]
        cum = [0.0, leg]
        for a, b in zip(path, path[1:]):
            cum.append(cum[-1] + self._edge_len(a, b))
        cum.append(cum[-1] + dest_leg)
        v.route_x, v.route_y, v.route_cum = xs, ys, cum
        v.route_nodes = [-1] + list(path) + [-1]
        v.route_total = cum[-1]

    def _edge_len(self, a: int, b: int) -> float:
        row = self._road_row(a)
        return float(row[b])

    def _point_at(self, v: VehicleState, travel: float) -> Point:
        cum = v.route_cum
        if travel >= v.route_total:
            return Point(v.route_x[-1], v.route_y[-1])
        k = bisect_right(cum, travel) - 1
        seg = cum[k + 1] - cum[k]
        f = 0.0 if seg <= 0 else (travel - cum[k]) / seg
        return Point(v.route_x[k] + f * (v.route_x[k + 1] - v.route_x[k]),
                     v.route_y[k] + f * (v.route_y[k + 1] - v.route_y[k]))

    # -- scheduling of driving -------------------------------------------------

    def _schedule_next(self, v: VehicleState) -> None:
        """Queue the vehicle for the first tick with an arrival or threshold event."""
        step = v.speed * self.dt
        remaining = v.route_total - v.anchor_travel
        n = _ticks_to_cover(remaining, step)
        cons = v.spec.consumption_kwh_per_km
        if cons > 0:
            per_km = cons / v.spec.capacity_kwh
            thresholds = [0.0]
            if v.mode == DRIVING:
                thresholds.append(self.config.soc_forced_threshold if v.decided_30
                                  else self.config.soc_consider_threshold)
            for thr in thresholds:
                km = (v.anchor_soc - thr) / per_km
                n = min(n, _ticks_to_cover(km, step))
        self._due(v.anchor_tick + n - 1, v.id)

    def _advance(self, v: VehicleState, tick: int) -> None:
        """Bring a driving vehicle's travel, soc and position up to the end of ``tick``."""
        n = tick - v.anchor_tick + 1
        travel = min(v.route_total, v.anchor_travel + n * v.speed * self.dt)
        cons = v.spec.consumption_kwh_per_km
        per_km = cons / v.spec.capacity_kwh
        soc = v.anchor_soc - (travel - v.anchor_travel) * per_km
        if soc <= 0.0:
            travel = v.anchor_travel + v.anchor_soc / per_km
            soc = 0.0
        v.km_driven += travel - v.anchor_travel
        v.soc = soc
        v.anchor_tick = tick + 1
        v.anchor_travel = travel
        v.anchor_soc = soc
        v.position = self._point_at(v, travel)

    def _start_trip_to_building(self, v: VehicleState, start_tick: int) -> None:
        row_node, leg = self._anchor(v)
        road = leg + self._road_row(row_node)[self.b_node] + self.b_leg
        dest = pick_destination(road, self.config.min_trip_km, self.rng_dest, v.building)
        self._set_route(v, v.position, row_node, leg, int(self.b_node[dest]),
                        self.scenario.buildings[dest], float(self.b_leg[dest]))
        v.destination = dest
        v.target_station = -1
        v.mode = DRIVING
        v.building = -1
        v.station = -1
        v.anchor_tick = start_tick
        v.anchor_travel = 0.0
        v.anchor_soc = v.soc
        self._schedule_next(v)

    def _start_seeking(self, v: VehicleState, start_tick: int) -> bool:
        d = self._straight(self.s_xy, v.position)
        order = np.lexsort((np.arange(d.size), d))
        target = next((int(k) for k in order if int(k) not in v.rejected), None)
        if target is None:
            return False
        anchor, leg = self._anchor(v)
        self._set_route(v, v.position, anchor, leg, int(self.s_node[target]),
                        self.stations[target].location, float(self.s_leg[target]))
        v.target_station = target
        v.mode = SEEKING
        v.building = -1
        v.station = -1
        v.anchor_tick = start_tick
        v.anchor_travel = 0.0
        v.anchor_soc = v.soc
        self._log(v.id, "seek", target, v.soc)
        self._schedule_next(v)
        return True

    # -- vehicle processing ----------------------------------------------------

    def _process_vehicle(self, v: VehicleState, tick: int) -> None:
        if v.mode in (DRIVING, SEEKING):
            self._advance(v, tick)
            if v.soc <= 0.0:
                v.mode = STRANDED
                self.stranded += 1
                self._log(v.id, "stranded", -1, 0.0)
                return
            if v.anchor_travel >= v.route_total:
                if v.mode == SEEKING:
                    self._arrive(v, tick)
                    return
                v.building = v.destination
                v.position = self.scenario.buildings[v.building]
                v.mode = IDLE
                self._log(v.id, "arrive_building", -1, v.soc)
                lo, hi = self.config.dwell_h
                if hi > 0:
                    if self._check_charging(v, tick):
                        return
                    dwell = float(self.rng_dest.uniform(lo, hi))
                    self._due(tick + max(1, math.ceil(dwell / self.dt - 1e-9)), v.id)
                    return
                if not self._check_charging(v, tick):
                    self._start_trip_to_building(v, tick + 1)
                return
            if v.mode == DRIVING:
                if not self._check_charging(v, tick):
                    self._schedule_next(v)
            else:
                self._schedule_next(v)
        elif v.mode == IDLE:
            if v.target_station == -2:
                # retry after every station turned the vehicle away
                v.rejected.clear()
                v.target_station = -1
                if not self._start_seeking(v, tick + 1):
                    self._due(tick + 1, v.id)
                return
            if not self._check_charging(v, tick):
                self._start_trip_to_building(v, tick + 1)

    def _check_charging(self, v: VehicleState, tick: int) -> bool:
        was_decided = v.decided_30
        decision = decide_charging(v, self.config, self.rng_dec)
        if v.decided_30 and not was_decided and decision == KEEP_DRIVING:
            self._log(v.id, "decline_30", -1, v.soc)
        if decision == START_SEEKING:
            v.rejected.clear()
            return self._start_seeking(v, tick + 1)
        return False

    def _arrive(self, v: VehicleState, tick: int) -> None:
        k = v.target_station
        st = self.stations[k]
        v.position = st.location
        v.station = k
        now = (tick + 1) * self.dt
        outcome, port = arrive_at_station(st, v.id)
        if outcome == CHARGING:
            self.st_arrivals[k] += 1
            self._log(v.id, "arrive", k, v.soc)
            v.queued_at = now
            self._begin_session(k, port, v, now)
        elif outcome == QUEUED:
            self.st_arrivals[k] += 1
            v.mode = QUEUED
            v.queued_at = now
            v.wait_clock = 0.0
            self._log(v.id, "enqueue", k, v.soc)
        else:
            self.st_rejections[k] += 1
            self._log(v.id, "reject", k, v.soc)
            v.rejected.add(k)
            if not self._start_seeking(v, tick + 1):
                v.mode = IDLE
                v.target_station = -2
                self._due(tick + 1, v.id)

    # -- stations --------------------------------------------------------------

    def _begin_session(self, k: int, port_idx: int, v: VehicleState, now: float) -> None:
        st = self.stations[k]
        port = st.ports[port_idx]
        port.occupant = v.id
        wait = now - v.queued_at
        v.wait_clock = wait
        v.mode = CHARGING
        v.station = k
        v.session_start_soc = v.soc
        self.wait_records.append((v.id, st.id, wait))
        self.st_waits[k].append(wait)
        stop_thr = self.config.soc_stop_threshold
        if v.soc < stop_thr:
            port.target, port.pending_stop = stop_thr, True
        else:
            port.target, port.pending_stop = 1.0, False
        port.cursor = now
        port.session = len(self.sessions)
        self.sessions.append({"vehicle": v.id, "station": st.id, "power_kw": port.power,
                              "capacity_kwh": v.spec.capacity_kwh, "soc_start": v.soc,
                              "soc_end": v.soc, "start_h": now, "end_h": now, "complete": False})
        self.busy.add(k)
        self._log(v.id, "start_charge", k, v.soc, wait)

    def _advance_station(self, k: int, t0: float, t1: float) -> None:
        st = self.stations[k]
        heap = []
        for i, p in enumerate(st.ports):
            if p.occupant is not None:
                heap.append((self._event_time(p), i))
        heapq.heapify(heap)
        while heap and heap[0][0] <= t1:
            when, i = heapq.heappop(heap)
            p = st.ports[i]
            v = self.vehicles[p.occupant]
            v.soc = p.target
            p.cursor = when
            if p.pending_stop:
                p.pending_stop = False
                if stop_decision(v, self.config, self.rng_dec) == CONTINUE_TO_FULL and p.target < 1.0:
                    self._log(v.id, "continue_charge", k, v.soc)
                    p.target = 1.0
                    heapq.heappush(heap, (self._event_time(p), i))
                    continue
            self._finish_session(k, i, when)
            if st.queue:
                nxt = self.vehicles[st.queue.popleft()]
                j = st.free_port()
                self._begin_session(k, j, nxt, when)
                heapq.heappush(heap, (self._event_time(st.ports[j]), j))
        busy = False
        for p in st.ports:
            if p.occupant is not None:
                v = self.vehicles[p.occupant]
                v.soc = min(p.target, v.soc + (t1 - p.cursor) * p.power / v.spec.capacity_kwh)
                p.cursor = t1
                s = self.sessions[p.session]
                s["soc_end"], s["end_h"] = v.soc, t1
                busy = True
        if not busy:
            self.busy.discard(k)

    def _event_time(self, p: Port) -> float:
        v = self.vehicles[p.occupant]
        if v.soc >= p.target:
            return p.cursor
        return p.cursor + charging_duration(v.spec.capacity_kwh, v.soc, p.target, p.power)

    def _finish_session(self, k: int, port_idx: int, when: float) -> None:
        st = self.stations[k]
        p = st.ports[port_idx]
        v = self.vehicles[p.occupant]
        s = self.sessions[p.session]
        s["soc_end"], s["end_h"], s["complete"] = v.soc, when, True
        p.occupant = None
        p.session = -1
        self.st_completed[k] += 1
        self._log(v.id, "end_charge", k, v.soc)
        v.decided_30 = False
        v.declined_30_flag = False
        v.rejected.clear()
        v.mode = IDLE
        v.station = k
        v.position = st.location
        v.route_x = None
        tick = self.tick
        self._start_trip_to_building(v, tick + 1)

    # -- main loop -------------------------------------------------------------

    def run(self) -> SimulationResult:
        for tick in range(self.n_ticks):
            self.tick = tick
            t0, t1 = tick * self.dt, (tick + 1) * self.dt
            for k in sorted(self.busy):
                self._advance_station(k, t0, t1)
            due = self.schedule.pop(tick, None)
            if due:
                for vid in sorted(due):
                    self._process_vehicle(self.vehicles[vid], tick)
            if self.observer is not None:
                self.observer(self, tick)
        return self._result()

    def _result(self) -> SimulationResult:
        end = self.n_ticks * self.dt
        waits = [w for _, _, w in self.wait_records]
        censored = [end - self.vehicles[vid].queued_at for st in self.stations for vid in st.queue]
        stats = []
        for k, st in enumerate(self.stations):
            w = self.st_waits[k]
            hours = sum(s["end_h"] - s["start_h"] for s in self.sessions if s["station"] == st.id)
            stats.append(StationStats(st.id, float(np.mean(w)) if w else 0.0, self.st_arrivals[k],
                                      self.st_rejections[k], self.st_completed[k], hours))
        total = float(sum(s["end_h"] - s["start_h"] for s in self.sessions))
        return SimulationResult(
            waits=waits,
            wait_records=list(self.wait_records),
            station_stats=stats,
            total_charging_hours=total,
            mean_wait=float(np.mean(waits)) if waits else 0.0,
            n_sessions=len(self.sessions),
            stranded=self.stranded,
            censored_waits=censored,
            sessions=self.sessions,
            events=self.events if self.record_events else None,
        )


def _ticks_to_cover(km: float, step: float) -> int:
    """Number of ticks (>= 1) after which ``km`` is covered at ``step`` km per tick."""
    if km <= 0:
        return 1
    if step <= 0:
        return 1 << 62
    n = math.ceil(km / step)
    if (n - 1) * step >= km:
        n -= 1
    return max(1, n)


def run(scenario: Scenario, stations: Sequence[StationSite], config: SimulationConfig,
        seed: int | None = None, record_events: bool = False,
        observer: Callable[[Simulation, int], None] | None = None) -> SimulationResult:
    return Simulation(scenario, stations, config, seed, record_events, observer=observer).run()
