"""Bounded Voronoi diagrams and the candidate vertex set derived from them.

Each cell is built by clipping the domain rectangle with the half-planes
``|x - s_i| <= |x - s_j|`` for every other site, so cells are convex, bounded
and exact up to floating-point rounding.  Clipping corners on the domain
boundary are kept as vertices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation
from .geodata import Domain, Point

MERGE_TOL = 1e-9
VERTEX_TOL = 1e-6
DEFAULT_MIN_SEPARATION_KM = 0.05


@dataclass(frozen=True)
class VoronoiDiagram:
    sites: tuple[Point, ...]
    regions: tuple[tuple[Point, ...], ...]  # counter-clockwise polygon per site
    vertices: tuple[Point, ...]
    domain: Domain

    def to_dict(self) -> dict:
        return {
            "domain": [self.domain.xmin, self.domain.ymin, self.domain.xmax, self.domain.ymax],
            "sites": [[p.x, p.y] for p in self.sites],
            "polygons": [[[p.x, p.y] for p in poly] for poly in self.regions],
            "vertices": [[p.x, p.y] for p in self.vertices],
        }

    def dump_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _clip(poly: list[tuple[float, float]], nx: float, ny: float, c: float) -> list[tuple[float, float]]:
    """Keep the part of ``poly`` where nx*x + ny*y <= c (Sutherland-Hodgman)."""
    out: list[tuple[float, float]] = []
    n = len(poly)
    for k in range(n):
        px, py = poly[k]
        qx, qy = poly[(k + 1) % n]
        fp = nx * px + ny * py - c
        fq = nx * qx + ny * qy - c
        if fp <= 0:
            out.append((px, py))
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((px + t * (qx - px), py + t * (qy - py)))
    return _dedupe_ring(out)


def _dedupe_ring(poly: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for p in poly:
        if not out or abs(p[0] - out[-1][0]) > MERGE_TOL or abs(p[1] - out[-1][1]) > MERGE_TOL:
            out.append(p)
    while len(out) > 1 and abs(out[0][0] - out[-1][0]) <= MERGE_TOL and abs(out[0][1] - out[-1][1]) <= MERGE_TOL:
        out.pop()
    return out


def merge_sites(sites: Sequence[Point], tol: float = MERGE_TOL) -> list[Point]:
    """Drop sites lying within ``tol`` of an earlier site (first occurrence wins)."""
    kept: list[Point] = []
    for s in sites:
        if all(abs(s.x - k.x) > tol or abs(s.y - k.y) > tol for k in kept):
            kept.append(s)
    return kept


def dedupe_points(points: Sequence[Point], tol: float = VERTEX_TOL) -> list[Point]:
    """Cluster points closer than ``tol`` and return them sorted by (x, y)."""
    if not points:
        return []
    arr = np.array([[p.x, p.y] for p in points], dtype=float)
    order = np.lexsort((arr[:, 1], arr[:, 0]))
    kept: list[np.ndarray] = []
    for idx in order:
        q = arr[idx]
        # sorted by x, so only recent entries can be within tol
        dup = False
        for k in reversed(kept):
            if q[0] - k[0] > tol:
                break
            if np.hypot(*(q - k)) < tol:
                dup = True
                break
        if not dup:
            kept.append(q)
    kept.sort(key=lambda a: (a[0], a[1]))
    return [Point(float(a[0]), float(a[1])) for a in kept]


def compute_diagram(sites: Sequence[Point], domain: Domain) -> VoronoiDiagram:
    if not sites:
        raise ContractViolation("Voronoi diagram needs at least one site")
    for s in sites:
        if not domain.contains(s):
            raise ContractViolation(f"site ({s.x}, {s.y}) lies outside the domain")
    uniq = merge_sites(sites)
    x0, y0, x1, y1 = (float(v) for v in (domain.xmin, domain.ymin, domain.xmax, domain.ymax))
    box = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    regions = []
    for i, si in enumerate(uniq):
        poly = list(box)
        # nearest neighbours first; a site farther than twice the cell's current
        # reach cannot cut it any more
        others = sorted(((sj.x - si.x) ** 2 + (sj.y - si.y) ** 2, j) for j, sj in enumerate(uniq) if j != i)
        for d2, j in others:
            reach2 = max((x - si.x) ** 2 + (y - si.y) ** 2 for x, y in poly)
            if d2 > 4.0 * reach2 * (1.0 + 1e-9):
                break
            sj = uniq[j]
            nx, ny = sj.x - si.x, sj.y - si.y
            c = 0.5 * ((sj.x ** 2 + sj.y ** 2) - (si.x ** 2 + si.y ** 2))
            poly = _clip(poly, nx, ny, c)
            if not poly:
                break
        regions.append(tuple(Point(x, y) for x, y in poly))
    vertices = dedupe_points([p for poly in regions for p in poly])
    return VoronoiDiagram(tuple(uniq), tuple(regions), tuple(vertices), domain)


def candidate_vertices(
    diagram: VoronoiDiagram,
    existing: Sequence[Point],
    min_separation: float = DEFAULT_MIN_SEPARATION_KM,
) -> list[Point]:
    """Diagram vertices that are at least ``min_separation`` km from every existing site."""
    if not existing:
        return list(diagram.vertices)
    ex = np.array([[p.x, p.y] for p in existing], dtype=float)
    out = []
    for v in diagram.vertices:
        if np.min(np.hypot(ex[:, 0] - v.x, ex[:, 1] - v.y)) >= min_separation:
            out.append(v)
    return out


def voronoi_candidates(
    sites: Sequence[Point], domain: Domain, min_separation: float = DEFAULT_MIN_SEPARATION_KM
) -> list[Point]:
    return candidate_vertices(compute_diagram(sites, domain), sites, min_separation)


def polygon_area(poly: Sequence[Point]) -> float:
    if len(poly) < 3:
        return 0.0
    s = 0.0
    for k in range(len(poly)):
        a, b = poly[k], poly[(k + 1) % len(poly)]
        s += a.x * b.y - b.x * a.y
    return 0.5 * s


def point_in_convex(poly: Sequence[Point], p: Point, tol: float = 1e-9) -> bool:
    n = len(poly)
    if n < 3:
        return False
    for k in range(n):
        a, b = poly[k], poly[(k + 1) % n]
        if (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) < -tol:
            return False
    return True
