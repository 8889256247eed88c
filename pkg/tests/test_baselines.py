import json
import math

import numpy as np
import pytest

from voltsite.baselines import (PlacementPlan, assign_ports, assign_ports_density, assign_ports_random,
                                density_port_probabilities, place_probabilistic, place_radial,
                                place_voronoi_greedy)
from voltsite.catalog import DEFAULT_CATALOG
from voltsite.dqn import best_deterministic_candidate
from voltsite.environment import EnvConfig, PlacementEnv
from voltsite.errors import ContractViolation, InfeasibleError
from voltsite.geodata import Point, PopulationRaster, scenario_from_dict

from conftest import MINIMAL_DOC


def raster_doc(cells, rows, cols):
    doc = json.loads(json.dumps(MINIMAL_DOC))
    doc["raster"] = {"origin": [0, 0], "cell_size_km": 4.0 / cols, "rows": rows, "cols": cols,
                     "cells": list(map(float, cells))}
    return scenario_from_dict(doc)


# ---------------------------------------------------------------- voronoi greedy


def test_voronoi_greedy_k1_matches_exhaustive_scan(toy_scenario):
    env = PlacementEnv(toy_scenario, EnvConfig(use_simulation=False))
    w = env.reset()
    plan = place_voronoi_greedy(toy_scenario, 1)
    assert plan.points == [w.candidates[best_deterministic_candidate(env)]] == [Point(5.0, 5.0)]


def test_voronoi_greedy_k0_and_determinism(desk_scenario):
    assert len(place_voronoi_greedy(desk_scenario, 0)) == 0
    a, b = place_voronoi_greedy(desk_scenario, 4), place_voronoi_greedy(desk_scenario, 4)
    assert a.to_json() == b.to_json() and len(a) == 4
    assert len(set(a.points)) == 4
    with pytest.raises(ContractViolation):
        place_voronoi_greedy(desk_scenario, -1)


# ---------------------------------------------------------------- radial


def test_radial_single_point_on_inner_ring(toy_scenario):
    plan = place_radial(toy_scenario, 1, seed=3)
    phase = np.random.default_rng(3).uniform(0, 2 * math.pi)
    r = math.hypot(10, 10) / 6
    (p,) = plan.points
    assert p.x == pytest.approx(5 + r * math.cos(phase), abs=1e-12)
    assert p.y == pytest.approx(5 + r * math.sin(phase), abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 5, 6, 13, 30, 60])
def test_radial_points_inside_domain(desk_scenario, k):
    plan = place_radial(desk_scenario, k, seed=k)
    assert len(plan) == k
    assert all(desk_scenario.domain.contains(p, 1e-12) for p in plan.points)


def test_radial_rings_fill_inside_out(toy_scenario):
    plan = place_radial(toy_scenario, 6, seed=0)
    radii = [math.hypot(p.x - 5, p.y - 5) for p in plan.points]
    r = math.hypot(10, 10) / 6
    assert radii[0] == pytest.approx(r)
    assert radii[1:3] == pytest.approx([2 * r, 2 * r])
    # outer ring points are clipped to the box but stay beyond the middle ring
    assert all(v >= 2 * r for v in radii[3:])


def test_radial_reproducible(desk_scenario):
    assert place_radial(desk_scenario, 8, seed=2).to_json() == place_radial(desk_scenario, 8, seed=2).to_json()
    assert place_radial(desk_scenario, 8, seed=2).points != place_radial(desk_scenario, 8, seed=3).points


# ---------------------------------------------------------------- probabilistic


def test_probabilistic_single_positive_cell():
    sc = raster_doc([0, 0, 0, 7], 2, 2)
    assert place_probabilistic(sc, 1, seed=0).points == [Point(3.0, 3.0)]
    with pytest.raises(InfeasibleError):
        place_probabilistic(sc, 2, seed=0)


def test_probabilistic_uniform_raster():
    sc = raster_doc([1] * 16, 4, 4)
    firsts = [place_probabilistic(sc, 1, seed=s).points[0] for s in range(10_000)]
    centers = [sc.raster.cell_center(r, c) for r in range(4) for c in range(4)]
    counts = np.array([firsts.count(p) for p in centers])
    assert counts.sum() == 10_000
    assert float(((counts - 625) ** 2 / 625).sum()) < 37.70  # 99.9% quantile, 15 dof


def test_probabilistic_proportional_law():
    sc = raster_doc([900, 100], 1, 2)
    hits = sum(place_probabilistic(sc, 1, seed=s).points[0] == Point(1.0, 1.0) for s in range(10_000))
    # binomial standard deviation is 30, allow 4 of them
    assert abs(hits - 9000) < 120


def test_probabilistic_distinct_cells(desk_scenario):
    plan = place_probabilistic(desk_scenario, 10, seed=1)
    assert len(set(plan.points)) == 10


# ---------------------------------------------------------------- ports


def test_port_probabilities_from_table():
    p = DEFAULT_CATALOG.probabilities()
    assert p[1] == 20 / 84 and p[9] == 1 / 84


def test_random_ports_match_frequencies():
    n = 100_000
    draws = assign_ports_random(n, seed=0)
    counts = np.bincount(draws, minlength=11)[1:]
    p = DEFAULT_CATALOG.probabilities()
    sigma = np.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts - n * p) <= 3 * sigma)


def test_random_ports_deterministic():
    assert assign_ports_random(50, seed=4) == assign_ports_random(50, seed=4)


def test_density_tilt_identity_at_zero():
    assert np.allclose(density_port_probabilities(0.0, 100.0), DEFAULT_CATALOG.probabilities(), rtol=0, atol=1e-15)


def test_density_tilt_at_full_density():
    p = density_port_probabilities(100.0, 100.0)
    untilted = DEFAULT_CATALOG.probabilities()
    # exponent 1 multiplies each weight by power_j / 250
    assert (p[9] / p[0]) / (untilted[9] / untilted[0]) == pytest.approx(250 / 7, rel=1e-12)
    assert p.sum() == pytest.approx(1.0)


def test_density_ports_deterministic():
    r = PopulationRaster(Point(0, 0), 1.0, np.array([[1.0, 50.0], [10.0, 100.0]]))
    pts = [Point(0.5, 0.5), Point(1.5, 1.5)] * 10
    assert assign_ports_density(pts, r, seed=1) == assign_ports_density(pts, r, seed=1)


# ---------------------------------------------------------------- plans


def test_assign_ports_and_plan_round_trip(desk_scenario):
    plan = assign_ports(place_radial(desk_scenario, 5, seed=1), "density", desk_scenario, seed=1, port_count=3)
    assert plan.method == "radial/density"
    assert all(1 <= s.port_type <= 10 and s.port_count == 3 for s in plan.stations)
    again = PlacementPlan.from_dict(json.loads(plan.to_json()))
    assert again.to_json() == plan.to_json()
    assert [s.ports for s in plan.sites()] == [((s.port_type, 3),) for s in plan.stations]
    with pytest.raises(ContractViolation):
        assign_ports(plan, "fancy", desk_scenario)
