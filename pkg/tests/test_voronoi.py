import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import interior, nearest_site_count, random_sites, scipy_interior_vertices
from voltsite.errors import ContractViolation
from voltsite.geodata import Domain, Point
from voltsite.voronoi import (candidate_vertices, compute_diagram, dedupe_points, point_in_convex, polygon_area,
                              voronoi_candidates)

BOX = Domain(0.0, 0.0, 4.0, 4.0)


def test_single_site_gives_corners():
    diag = compute_diagram([Point(2, 2)], BOX)
    assert len(diag.regions) == 1
    assert sorted(diag.vertices, key=lambda p: (p.x, p.y)) == [Point(0, 0), Point(0, 4), Point(4, 0), Point(4, 4)]
    assert polygon_area(diag.regions[0]) == pytest.approx(16.0)
    assert voronoi_candidates([Point(2, 2)], BOX) == list(diag.vertices)


def test_two_symmetric_sites_split_on_bisector():
    diag = compute_diagram([Point(1, 2), Point(3, 2)], BOX)
    assert Point(2.0, 0.0) in diag.vertices and Point(2.0, 4.0) in diag.vertices
    assert [polygon_area(r) for r in diag.regions] == pytest.approx([8.0, 8.0])


def test_square_sites_share_center():
    sites = [Point(1, 1), Point(3, 1), Point(3, 3), Point(1, 3)]
    diag = compute_diagram(sites, BOX)
    assert Point(2.0, 2.0) in diag.vertices
    for region in diag.regions:
        assert Point(2.0, 2.0) in region


def test_equilateral_triangle_includes_circumcenter():
    big = Domain(-10, -10, 10, 10)
    r = 2.0
    sites = [Point(r * math.cos(a), r * math.sin(a)) for a in (math.pi / 2, math.pi / 2 + 2 * math.pi / 3,
                                                               math.pi / 2 + 4 * math.pi / 3)]
    cands = voronoi_candidates(sites, big)
    assert any(math.hypot(c.x, c.y) < 1e-9 for c in cands)


def test_candidates_drop_vertices_near_sites():
    diag = compute_diagram([Point(0.01, 0.01), Point(3, 3)], BOX)
    assert Point(0.0, 0.0) in diag.vertices
    cands = candidate_vertices(diag, diag.sites, 0.05)
    assert Point(0.0, 0.0) not in cands
    assert all(min(math.hypot(c.x - s.x, c.y - s.y) for s in diag.sites) >= 0.05 for c in cands)


def test_candidates_sorted_and_unique():
    rng = np.random.default_rng(5)
    sites = random_sites(rng, 12, BOX)
    cands = voronoi_candidates(sites, BOX)
    assert cands == sorted(cands, key=lambda p: (p.x, p.y))
    for a in range(len(cands)):
        for b in range(a + 1, len(cands)):
            assert math.hypot(cands[a].x - cands[b].x, cands[a].y - cands[b].y) > 1e-6


def test_random_ten_sites_brute_force():
    rng = np.random.default_rng(10)
    sites = random_sites(rng, 10, BOX)
    for v in voronoi_candidates(sites, BOX):
        assert BOX.on_boundary(v) or nearest_site_count(v, sites) >= 3


def test_interior_vertices_agree_with_scipy():
    pytest.importorskip("scipy")
    rng = np.random.default_rng(11)
    for _ in range(20):
        sites = random_sites(rng, int(rng.integers(3, 25)), BOX)
        ours = [v for v in compute_diagram(sites, BOX).vertices if interior(v, BOX)]
        ref = scipy_interior_vertices(sites, BOX)
        for x, y in ref:
            assert min(math.hypot(x - v.x, y - v.y) for v in ours) < 1e-6
        for v in ours:
            assert min(math.hypot(x - v.x, y - v.y) for x, y in ref) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 20))
def test_regions_convex_contained_and_partition(seed, n):
    rng = np.random.default_rng(seed)
    sites = random_sites(rng, n, BOX)
    diag = compute_diagram(sites, BOX)
    total = 0.0
    for poly in diag.regions:
        area = polygon_area(poly)
        assert area >= -1e-12
        total += area
        for p in poly:
            assert BOX.contains(p, 1e-9)
        # convex, counter-clockwise turns only
        for k in range(len(poly)):
            a, b, c = poly[k], poly[(k + 1) % len(poly)], poly[(k + 2) % len(poly)]
            assert (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x) >= -1e-9
    assert total == pytest.approx(16.0, rel=1e-9)
    # sampled points are closest to the site owning their region
    for q in random_sites(rng, 30, BOX):
        owners = [i for i, poly in enumerate(diag.regions) if point_in_convex(poly, q, 1e-9)]
        d = [math.hypot(q.x - s.x, q.y - s.y) for s in diag.sites]
        assert owners and all(d[i] <= min(d) + 1e-9 for i in owners)


def test_duplicate_sites_are_merged():
    diag = compute_diagram([Point(1, 1), Point(1, 1), Point(3, 3)], BOX)
    assert len(diag.sites) == 2


def test_site_outside_domain_rejected():
    with pytest.raises(ContractViolation):
        compute_diagram([Point(5, 5)], BOX)
    with pytest.raises(ContractViolation):
        compute_diagram([], BOX)


def test_dedupe_points():
    pts = [Point(1, 1), Point(1 + 1e-8, 1), Point(0, 2)]
    assert dedupe_points(pts) == [Point(0.0, 2.0), Point(1.0, 1.0)]


def test_diagram_json_export():
    diag = compute_diagram([Point(1, 1), Point(3, 3)], BOX)
    doc = diag.to_dict()
    assert len(doc["polygons"]) == 2 and len(doc["vertices"]) == len(diag.vertices)
