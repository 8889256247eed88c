"""Spatial substrate: points, distances, population raster, road network, scenarios.

Coordinates are planar kilometres (x east, y north) in the scenario frame.  A
scenario in ``geographic`` mode additionally carries a reference origin so that
points can be tagged with latitude/longitude and distances become great-circle
distances.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .catalog import DEFAULT_CATALOG, N_PORT_TYPES
from .errors import (
    ContractViolation,
    GenerationError,
    NoRouteError,
    OutOfExtentError,
    ValidationError,
)

EARTH_RADIUS_KM = 6371.0088
PLANAR = "planar"
GEOGRAPHIC = "geographic"
COORDINATE_MODES = (PLANAR, GEOGRAPHIC)


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    lat: float | None = None
    lon: float | None = None

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def distance(a: Point, b: Point, mode: str = PLANAR) -> float:
    """Distance in km; Euclidean in planar mode, haversine in geographic mode."""
    if mode == PLANAR:
        return math.hypot(a.x - b.x, a.y - b.y)
    if mode != GEOGRAPHIC:
        raise ContractViolation(f"unknown coordinate mode {mode!r}")
    if a.lat is None or a.lon is None or b.lat is None or b.lon is None:
        raise ContractViolation("geographic distance needs lat/lon tags on both points")
    return haversine_km(a.lat, a.lon, b.lat, b.lon)


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


@dataclass(frozen=True)
class Domain:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ContractViolation("domain must have positive width and height")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def center(self) -> Point:
        return Point((self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2)

    def corners(self) -> list[Point]:
        return [
            Point(self.xmin, self.ymin),
            Point(self.xmax, self.ymin),
            Point(self.xmax, self.ymax),
            Point(self.xmin, self.ymax),
        ]

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        return (
            self.xmin - tol <= p.x <= self.xmax + tol
            and self.ymin - tol <= p.y <= self.ymax + tol
        )

    def on_boundary(self, p: Point, tol: float = 1e-9) -> bool:
        return self.contains(p, tol) and (
            abs(p.x - self.xmin) <= tol
            or abs(p.x - self.xmax) <= tol
            or abs(p.y - self.ymin) <= tol
            or abs(p.y - self.ymax) <= tol
        )

    def clip(self, p: Point) -> Point:
        return Point(min(max(p.x, self.xmin), self.xmax), min(max(p.y, self.ymin), self.ymax))


@dataclass(frozen=True)
class GeoFrame:
    """Local equirectangular frame anchoring planar km coordinates to lat/lon."""

    origin_lat: float
    origin_lon: float

    def tag(self, p: Point) -> Point:
        lat = self.origin_lat + math.degrees(p.y / EARTH_RADIUS_KM)
        lon = self.origin_lon + math.degrees(
            p.x / (EARTH_RADIUS_KM * math.cos(math.radians(self.origin_lat)))
        )
        return Point(p.x, p.y, lat, lon)


# --------------------------------------------------------------------------- raster


@dataclass(frozen=True, eq=False)
class PopulationRaster:
    origin: Point
    cell_size: float
    cells: np.ndarray  # shape (rows, cols), row index grows with y
    rho_max: float = field(init=False)

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        if cells.ndim != 2 or cells.size == 0:
            raise ContractViolation("raster cells must be a non-empty 2-D grid")
        if self.cell_size <= 0:
            raise ContractViolation("cell_size must be positive")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "rho_max", float(cells.max()))

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def cols(self) -> int:
        return self.cells.shape[1]

    def extent(self) -> Domain:
        return Domain(
            self.origin.x,
            self.origin.y,
            self.origin.x + self.cols * self.cell_size,
            self.origin.y + self.rows * self.cell_size,
        )

    def cell_index(self, p: Point) -> tuple[int, int]:
        col = math.floor((p.x - self.origin.x) / self.cell_size)
        row = math.floor((p.y - self.origin.y) / self.cell_size)
        # the far edges of the extent belong to the last cell
        if col == self.cols and math.isclose(p.x, self.extent().xmax):
            col -= 1
        if row == self.rows and math.isclose(p.y, self.extent().ymax):
            row -= 1
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise OutOfExtentError(f"point ({p.x}, {p.y}) is outside the raster extent")
        return row, col

    def cell_center(self, row: int, col: int) -> Point:
        return Point(
            self.origin.x + (col + 0.5) * self.cell_size,
            self.origin.y + (row + 0.5) * self.cell_size,
        )


def density_at(raster: PopulationRaster, p: Point) -> float:
    row, col = raster.cell_index(p)
    return float(raster.cells[row, col])


# --------------------------------------------------------------------------- roads


class RoadNetwork:
    """Undirected weighted road graph with cached single-source shortest paths."""

    def __init__(self, nodes: Sequence[Point], edges: Iterable[tuple[int, int, float]]):
        self.nodes: tuple[Point, ...] = tuple(nodes)
        self.edges: tuple[tuple[int, int, float], ...] = tuple(
            (int(a), int(b), float(w)) for a, b, w in edges
        )
        self._adj: list[list[tuple[int, float]]] = [[] for _ in self.nodes]
        for a, b, w in self.edges:
            self._adj[a].append((b, w))
            self._adj[b].append((a, w))
        for nbrs in self._adj:
            nbrs.sort()
        self._trees: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._coords = np.array([[p.x, p.y] for p in self.nodes], dtype=float).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    def is_connected(self) -> bool:
        if not self.nodes:
            return False
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v, _ in self._adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self.nodes)

    def _tree(self, source: int) -> tuple[np.ndarray, np.ndarray]:
        tree = self._trees.get(source)
        if tree is None:
            tree = self._dijkstra(source)
            self._trees[source] = tree
        return tree

    def _dijkstra(self, source: int) -> tuple[np.ndarray, np.ndarray]:
        n = len(self.nodes)
        dist = np.full(n, np.inf)
        pred = np.full(n, -1, dtype=np.int64)
        dist[source] = 0.0
        heap = [(0.0, source)]
        done = np.zeros(n, dtype=bool)
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for v, w in self._adj[u]:
                nd = d + w
                if nd < dist[v] or (nd == dist[v] and not done[v] and u < pred[v]):
                    dist[v] = nd
                    pred[v] = u
                    heapq.heappush(heap, (nd, v))
        return dist, pred

    def distances_from(self, source: int) -> np.ndarray:
        return self._tree(source)[0]

    def shortest_path(self, a: int, b: int) -> tuple[list[int], float]:
        """Minimum-length node path from ``a`` to ``b`` and its length in km.

        Among equal-length routes, each node's predecessor is the smallest-index
        candidate, which makes the returned path deterministic.
        """
        n = len(self.nodes)
        if not (0 <= a < n and 0 <= b < n):
            raise ContractViolation(f"nodes {a}, {b} not in network of size {n}")
        dist, pred = self._tree(a)
        if not np.isfinite(dist[b]):
            raise NoRouteError(f"no route from node {a} to node {b}")
        path = [b]
        while path[-1] != a:
            path.append(int(pred[path[-1]]))
        path.reverse()
        return path, float(dist[b])

    def nearest_node(self, p: Point) -> int:
        d = np.hypot(self._coords[:, 0] - p.x, self._coords[:, 1] - p.y)
        return int(np.argmin(d))


def shortest_path(roads: RoadNetwork, a: int, b: int) -> tuple[list[int], float]:
    return roads.shortest_path(a, b)


# --------------------------------------------------------------------------- scenario


@dataclass(frozen=True)
class VehicleSpec:
    model: str
    capacity_kwh: float
    consumption_kwh_per_km: float

    def __post_init__(self):
        if self.capacity_kwh <= 0:
            raise ContractViolation("vehicle capacity must be positive")
        if self.consumption_kwh_per_km < 0:
            raise ContractViolation("consumption must be non-negative")


@dataclass(frozen=True)
class FleetEntry:
    spec: VehicleSpec
    count: int


@dataclass(frozen=True)
class StationSite:
    """A station as declared in a scenario or plan: location plus typed port counts."""

    id: str
    location: Point
    ports: tuple[tuple[int, int], ...]  # (port type j, count)

    @property
    def n_ports(self) -> int:
        return sum(c for _, c in self.ports)


@dataclass(frozen=True, eq=False)
class Scenario:
    domain: Domain
    raster: PopulationRaster
    roads: RoadNetwork
    buildings: tuple[Point, ...]
    substations: tuple[Point, ...]
    existing_stations: tuple[StationSite, ...]
    fleet: tuple[FleetEntry, ...]
    coordinate_mode: str = PLANAR
    geo_frame: GeoFrame | None = None

    @property
    def rho_max(self) -> float:
        return self.raster.rho_max

    @property
    def n_vehicles(self) -> int:
        return sum(f.count for f in self.fleet)

    def distance(self, a: Point, b: Point) -> float:
        if self.coordinate_mode == PLANAR:
            return math.hypot(a.x - b.x, a.y - b.y)
        return distance(self.geo_frame.tag(a), self.geo_frame.tag(b), GEOGRAPHIC)

    def distances_to(self, p: Point, others: Sequence[Point]) -> np.ndarray:
        if not others:
            return np.zeros(0)
        if self.coordinate_mode == PLANAR:
            xy = np.array([[q.x, q.y] for q in others], dtype=float)
            return np.hypot(xy[:, 0] - p.x, xy[:, 1] - p.y)
        return np.array([self.distance(p, q) for q in others])

    def with_stations(self, stations: Sequence[StationSite]) -> "Scenario":
        return Scenario(
            self.domain,
            self.raster,
            self.roads,
            self.buildings,
            self.substations,
            tuple(stations),
            self.fleet,
            self.coordinate_mode,
            self.geo_frame,
        )


def _point(obj: Any, path: str) -> Point:
    try:
        if isinstance(obj, dict):
            return Point(float(obj["x"]), float(obj["y"]))
        x, y = obj
        return Point(float(x), float(y))
    except (KeyError, TypeError, ValueError):
        raise ValidationError(path, "expected a point {x, y} or [x, y]") from None


def _require(doc: dict, key: str, path: str = "") -> Any:
    if key not in doc:
        raise ValidationError(f"{path}{key}", "missing required field")
    return doc[key]


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and fully validate a scenario from its JSON document."""
    if not isinstance(doc, dict):
        raise ValidationError("$", "scenario document must be a JSON object")
    mode = doc.get("coordinate_mode", PLANAR)
    if mode not in COORDINATE_MODES:
        raise ValidationError("coordinate_mode", f"must be one of {COORDINATE_MODES}")
    frame = None
    if mode == GEOGRAPHIC:
        origin = _require(doc, "geo_origin")
        try:
            frame = GeoFrame(float(origin["lat"]), float(origin["lon"]))
        except (KeyError, TypeError, ValueError):
            raise ValidationError("geo_origin", "expected {lat, lon}") from None

    d = _require(doc, "domain")
    try:
        domain = Domain(float(d["xmin"]), float(d["ymin"]), float(d["xmax"]), float(d["ymax"]))
    except (KeyError, TypeError, ValueError):
        raise ValidationError("domain", "expected {xmin, ymin, xmax, ymax}") from None
    except ContractViolation as exc:
        raise ValidationError("domain", str(exc)) from None

    r = _require(doc, "raster")
    rows = int(_require(r, "rows", "raster."))
    cols = int(_require(r, "cols", "raster."))
    cell_size = float(_require(r, "cell_size_km", "raster."))
    cells = np.asarray(_require(r, "cells", "raster."), dtype=float).ravel()
    if rows < 1 or cols < 1 or cells.size != rows * cols:
        raise ValidationError("raster.cells", f"expected {rows}x{cols} row-major values")
    if cell_size <= 0:
        raise ValidationError("raster.cell_size_km", "must be positive")
    bad = np.flatnonzero(~np.isfinite(cells) | (cells < 0))
    if bad.size:
        raise ValidationError(f"raster.cells[{int(bad[0])}]", "density must be finite and >= 0")
    if cells.max() <= 0:
        raise ValidationError("raster.cells", "all densities are zero (rho_max must be > 0)")
    raster = PopulationRaster(_point(_require(r, "origin", "raster."), "raster.origin"),
                              cell_size, cells.reshape(rows, cols))

    roads_doc = _require(doc, "roads")
    nodes = [_point(p, f"roads.nodes[{i}]") for i, p in enumerate(_require(roads_doc, "nodes", "roads."))]
    if not nodes:
        raise ValidationError("roads.nodes", "road network needs at least one node")
    edges = []
    for i, e in enumerate(_require(roads_doc, "edges", "roads.")):
        path = f"roads.edges[{i}]"
        try:
            a, b = (int(e["a"]), int(e["b"])) if isinstance(e, dict) else (int(e[0]), int(e[1]))
        except (KeyError, TypeError, ValueError, IndexError):
            raise ValidationError(path, "expected {a, b, length_km}") from None
        if not (0 <= a < len(nodes) and 0 <= b < len(nodes)) or a == b:
            raise ValidationError(path, "edge endpoints must be two distinct node indices")
        euclid = math.hypot(nodes[a].x - nodes[b].x, nodes[a].y - nodes[b].y)
        length = e.get("length_km", euclid) if isinstance(e, dict) else (e[2] if len(e) > 2 else euclid)
        length = float(length)
        if not length > 0:
            raise ValidationError(f"{path}.length_km", "edge length must be > 0")
        if length < euclid - 1e-9:
            raise ValidationError(f"{path}.length_km", "edge shorter than straight-line distance")
        edges.append((a, b, length))
    roads = RoadNetwork(nodes, edges)
    if not roads.is_connected():
        raise ValidationError("roads", "road network is disconnected")

    def inside(points: list[Point], name: str) -> tuple[Point, ...]:
        for i, p in enumerate(points):
            if not domain.contains(p):
                raise ValidationError(f"{name}[{i}]", "point lies outside the domain")
        return tuple(points)

    buildings = inside([_point(p, f"buildings[{i}]") for i, p in enumerate(_require(doc, "buildings"))], "buildings")
    if len(buildings) < 2:
        raise ValidationError("buildings", "at least 2 buildings are required")
    substations = inside([_point(p, f"substations[{i}]") for i, p in enumerate(_require(doc, "substations"))], "substations")
    if not substations:
        raise ValidationError("substations", "at least 1 substation is required")

    stations = []
    seen_ids = set()
    for i, s in enumerate(doc.get("stations", [])):
        path = f"stations[{i}]"
        sid = str(s.get("id", f"S{i}"))
        if sid in seen_ids:
            raise ValidationError(f"{path}.id", f"duplicate station id {sid!r}")
        seen_ids.add(sid)
        loc = _point(s, path)
        if not domain.contains(loc):
            raise ValidationError(path, f"station {sid!r} lies outside the domain")
        ports = []
        for k, port in enumerate(s.get("ports", [])):
            try:
                j, c = int(port["type"]), int(port["count"])
            except (KeyError, TypeError, ValueError):
                raise ValidationError(f"{path}.ports[{k}]", "expected {type, count}") from None
            if not 1 <= j <= N_PORT_TYPES:
                raise ValidationError(f"{path}.ports[{k}].type", "port type must be in 1..10")
            if c < 1:
                raise ValidationError(f"{path}.ports[{k}].count", "count must be >= 1")
            ports.append((j, c))
        if not ports:
            raise ValidationError(f"{path}.ports", f"station {sid!r} has no ports")
        stations.append(StationSite(sid, loc, tuple(ports)))

    fleet = []
    for i, f in enumerate(_require(doc, "fleet")):
        path = f"fleet[{i}]"
        try:
            spec = VehicleSpec(str(f["model"]), float(f["capacity_kwh"]), float(f["consumption_kwh_per_km"]))
            count = int(f["count"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError(path, "expected {model, capacity_kwh, consumption_kwh_per_km, count}") from None
        except ContractViolation as exc:
            raise ValidationError(path, str(exc)) from None
        if count < 0:
            raise ValidationError(f"{path}.count", "count must be >= 0")
        fleet.append(FleetEntry(spec, count))
    if sum(f.count for f in fleet) <= 0:
        raise ValidationError("fleet", "fleet total must be > 0")

    return Scenario(domain, raster, roads, buildings, substations, tuple(stations),
                    tuple(fleet), mode, frame)


def _pt(p: Point) -> dict:
    return {"x": float(p.x), "y": float(p.y)}


def station_to_dict(s: StationSite) -> dict:
    return {
        "id": s.id,
        "x": float(s.location.x),
        "y": float(s.location.y),
        "ports": [{"type": int(j), "count": int(c)} for j, c in s.ports],
    }


def scenario_to_dict(sc: Scenario) -> dict:
    doc = {
        "coordinate_mode": sc.coordinate_mode,
        "domain": {"xmin": sc.domain.xmin, "ymin": sc.domain.ymin,
                   "xmax": sc.domain.xmax, "ymax": sc.domain.ymax},
        "raster": {
            "origin": _pt(sc.raster.origin),
            "cell_size_km": float(sc.raster.cell_size),
            "rows": sc.raster.rows,
            "cols": sc.raster.cols,
            "cells": [float(v) for v in sc.raster.cells.ravel()],
        },
        "roads": {
            "nodes": [_pt(p) for p in sc.roads.nodes],
            "edges": [{"a": a, "b": b, "length_km": w} for a, b, w in sc.roads.edges],
        },
        "buildings": [_pt(p) for p in sc.buildings],
        "substations": [_pt(p) for p in sc.substations],
        "stations": [station_to_dict(s) for s in sc.existing_stations],
        "fleet": [
            {"model": f.spec.model, "capacity_kwh": f.spec.capacity_kwh,
             "consumption_kwh_per_km": f.spec.consumption_kwh_per_km, "count": f.count}
            for f in sc.fleet
        ],
    }
    if sc.geo_frame is not None:
        doc["geo_origin"] = {"lat": sc.geo_frame.origin_lat, "lon": sc.geo_frame.origin_lon}
    return doc


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError("$", f"invalid JSON: {exc}") from None
    return scenario_from_dict(doc)


def dump_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=1, sort_keys=True) + "\n"


def save_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(dump_scenario(sc))


# --------------------------------------------------------------------------- synthetic


DEFAULT_FLEET_MODELS = (
    ("VFe34", 42.0, 0.150),
    ("VF8", 87.7, 0.190),
    ("VF9", 123.0, 0.220),
)


@dataclass(frozen=True)
class SynthConfig:
    width_km: float = 4.0
    height_km: float = 4.0
    cell_km: float = 0.1
    grid_roads_x: int = 9
    grid_roads_y: int = 9
    base_density: float = 1000.0
    n_hotspots: int = 3
    hotspot_weight: float = 12000.0
    hotspot_sigma_km: float = 0.5
    n_buildings: int = 120
    substation_lattice: int = 2
    n_stations: int = 6
    existing_ports_per_station: int = 1
    n_vehicles: int = 200

    def validate(self) -> None:
        if self.grid_roads_x < 2 or self.grid_roads_y < 2:
            raise GenerationError("grid_roads_x/grid_roads_y must be >= 2")
        if self.n_hotspots < 1:
            raise GenerationError("n_hotspots must be >= 1")
        if self.width_km <= 0 or self.height_km <= 0 or self.cell_km <= 0:
            raise GenerationError("domain and cell sizes must be positive")
        if self.hotspot_weight < 0 or self.base_density <= 0:
            raise GenerationError("densities must be non-negative with base_density > 0")
        if self.n_buildings < 2 or self.substation_lattice < 1 or self.n_vehicles < 1:
            raise GenerationError("need >= 2 buildings, >= 1 substation and >= 1 vehicle")
        if self.n_stations < 0 or self.existing_ports_per_station < 1:
            raise GenerationError("n_stations must be >= 0 and ports per station >= 1")


PROFILES = {
    "desk": SynthConfig(),
    "paper": SynthConfig(
        width_km=8.0, height_km=8.0, cell_km=0.1, grid_roads_x=17, grid_roads_y=17,
        n_hotspots=5, n_buildings=600, substation_lattice=3, n_stations=30,
        existing_ports_per_station=2, n_vehicles=3000,
    ),
}


def generate_synthetic(config: SynthConfig, seed: int) -> Scenario:
    """Deterministic synthetic scenario over a grid road network.

    Density is a constant base plus a Gaussian mixture of hotspots; buildings
    and existing stations are sampled proportionally to it.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    domain = Domain(0.0, 0.0, config.width_km, config.height_km)
    cols = max(1, int(round(config.width_km / config.cell_km)))
    rows = max(1, int(round(config.height_km / config.cell_km)))
    cell = config.width_km / cols
    if not math.isclose(rows * cell, config.height_km):
        raise GenerationError("cell_km must tile both domain sides evenly")

    cx = (np.arange(cols) + 0.5) * cell
    cy = (np.arange(rows) + 0.5) * cell
    gx, gy = np.meshgrid(cx, cy)
    density = np.full((rows, cols), config.base_density)
    margin_x, margin_y = 0.1 * config.width_km, 0.1 * config.height_km
    for _ in range(config.n_hotspots):
        hx = rng.uniform(margin_x, config.width_km - margin_x)
        hy = rng.uniform(margin_y, config.height_km - margin_y)
        d2 = (gx - hx) ** 2 + (gy - hy) ** 2
        density += config.hotspot_weight * np.exp(-d2 / (2 * config.hotspot_sigma_km ** 2))
    density = np.round(density, 6)
    raster = PopulationRaster(Point(0.0, 0.0), cell, density)

    xs = np.linspace(0.0, config.width_km, config.grid_roads_x)
    ys = np.linspace(0.0, config.height_km, config.grid_roads_y)
    nodes = [Point(float(x), float(y)) for y in ys for x in xs]
    edges = []
    nx_ = config.grid_roads_x
    for r in range(config.grid_roads_y):
        for c in range(nx_):
            i = r * nx_ + c
            if c + 1 < nx_:
                edges.append((i, i + 1, float(xs[c + 1] - xs[c])))
            if r + 1 < config.grid_roads_y:
                edges.append((i, i + nx_, float(ys[r + 1] - ys[r])))
    roads = RoadNetwork(nodes, edges)

    weights = density.ravel() / density.sum()
    picks = rng.choice(weights.size, size=config.n_buildings, p=weights)
    jitter = rng.uniform(0.0, cell, size=(config.n_buildings, 2))
    buildings = tuple(
        Point(float(np.round((k % cols) * cell + jx, 6)), float(np.round((k // cols) * cell + jy, 6)))
        for k, (jx, jy) in zip(picks, jitter)
    )

    m = config.substation_lattice
    substations = tuple(
        Point(float((i + 0.5) * config.width_km / m), float((j + 0.5) * config.height_km / m))
        for j in range(m) for i in range(m)
    )

    positive = int(np.count_nonzero(weights > 0))
    if config.n_stations > positive:
        raise GenerationError(
            f"cannot place {config.n_stations} stations on {positive} distinct candidate cells"
        )
    cells_idx = rng.choice(weights.size, size=config.n_stations, replace=False, p=weights)
    probs = DEFAULT_CATALOG.probabilities()
    stations = []
    for i, k in enumerate(cells_idx):
        row, col = divmod(int(k), cols)
        drawn = rng.choice(np.arange(1, N_PORT_TYPES + 1), size=config.existing_ports_per_station, p=probs)
        counts: dict[int, int] = {}
        for j in drawn:
            counts[int(j)] = counts.get(int(j), 0) + 1
        stations.append(StationSite(f"S{i}", raster.cell_center(row, col), tuple(sorted(counts.items()))))

    n_models = len(DEFAULT_FLEET_MODELS)
    base, extra = divmod(config.n_vehicles, n_models)
    fleet = tuple(
        FleetEntry(VehicleSpec(name, cap, cons), base + (1 if i < extra else 0))
        for i, (name, cap, cons) in enumerate(DEFAULT_FLEET_MODELS)
    )
    scenario = Scenario(domain, raster, roads, buildings, substations, tuple(stations), fleet)
    # round-trip through the document form so generated and loaded scenarios agree exactly
    return scenario_from_dict(json.loads(dump_scenario(scenario)))
