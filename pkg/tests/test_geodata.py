import copy
import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voltsite.errors import ContractViolation, GenerationError, NoRouteError, OutOfExtentError, ValidationError
from voltsite.geodata import (PROFILES, Domain, GeoFrame, Point, PopulationRaster, RoadNetwork, SynthConfig,
                              density_at, distance, dump_scenario, generate_synthetic, load_scenario,
                              scenario_from_dict, scenario_to_dict, shortest_path)


def test_planar_distance_345():
    assert distance(Point(0, 0), Point(3, 4)) == 5.0


def test_distance_identity_both_modes():
    p = Point(1.5, -2.0, lat=21.0, lon=105.8)
    assert distance(p, p) == 0.0
    assert distance(p, p, "geographic") == 0.0


def test_geographic_one_degree_of_equator():
    # arc length of one degree on the equator: R * pi / 180
    expected = 6371.0088 * math.pi / 180.0
    d = distance(Point(0, 0, lat=0.0, lon=0.0), Point(0, 0, lat=0.0, lon=1.0), "geographic")
    assert d == pytest.approx(expected, abs=1e-9)
    assert abs(d - 111.19) < 0.01


def test_geographic_distance_needs_tags():
    with pytest.raises(ContractViolation):
        distance(Point(0, 0), Point(1, 1), "geographic")


def test_unknown_mode_rejected():
    with pytest.raises(ContractViolation):
        distance(Point(0, 0), Point(1, 1), "manhattan")


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50))
def test_planar_distance_symmetric_nonnegative(x1, y1, x2, y2):
    a, b = Point(x1, y1), Point(x2, y2)
    assert distance(a, b) == distance(b, a) >= 0.0


def test_geo_frame_tags_round_trip_distance():
    frame = GeoFrame(21.0, 105.8)
    a, b = frame.tag(Point(0.0, 0.0)), frame.tag(Point(3.0, 4.0))
    # small offsets: geodesic and planar agree closely
    assert distance(a, b, "geographic") == pytest.approx(5.0, rel=2e-3)


def _raster_2x2():
    return PopulationRaster(Point(0.0, 0.0), 2.0, np.array([[1.0, 2.0], [3.0, 4.0]]))


def test_density_at_origin_is_first_cell():
    assert density_at(_raster_2x2(), Point(0.0, 0.0)) == 1.0


def test_density_uniform_raster():
    r = PopulationRaster(Point(0, 0), 0.5, np.full((4, 6), 500.0))
    for p in [Point(0.1, 0.1), Point(2.9, 1.9), Point(1.25, 0.75)]:
        assert density_at(r, p) == 500.0


def test_density_interior_boundary_follows_floor():
    r = _raster_2x2()
    # x = 2 sits on the column boundary: floor(2 / 2) = 1
    assert density_at(r, Point(2.0, 1.0)) == 2.0
    assert density_at(r, Point(1.0, 2.0)) == 3.0
    assert density_at(r, Point(2.0, 2.0)) == 4.0


def test_density_far_edge_belongs_to_last_cell():
    r = _raster_2x2()
    assert density_at(r, Point(4.0, 4.0)) == 4.0


def test_density_outside_extent():
    with pytest.raises(OutOfExtentError):
        density_at(_raster_2x2(), Point(-0.1, 1.0))
    with pytest.raises(OutOfExtentError):
        density_at(_raster_2x2(), Point(1.0, 4.5))


def test_rho_max():
    assert _raster_2x2().rho_max == 4.0


def test_shortest_path_same_node():
    net = RoadNetwork([Point(0, 0), Point(2, 0)], [(0, 1, 2.0)])
    assert shortest_path(net, 0, 0) == ([0], 0.0)


def test_shortest_path_single_edge():
    net = RoadNetwork([Point(0, 0), Point(2, 0)], [(0, 1, 2.0)])
    assert shortest_path(net, 0, 1) == ([0, 1], 2.0)


def _five_node():
    # route 0-1-4 is 3 km, route 0-2-3-4 is 4 km
    nodes = [Point(0, 0), Point(1, 1), Point(1, -1), Point(2, -1), Point(2, 0)]
    edges = [(0, 1, 1.5), (1, 4, 1.5), (0, 2, 1.5), (2, 3, 1.0), (3, 4, 1.5)]
    return RoadNetwork(nodes, edges), edges


def test_shortest_path_five_nodes_matches_enumeration():
    net, edges = _five_node()
    adj = {(a, b): w for a, b, w in edges} | {(b, a): w for a, b, w in edges}
    best = None
    for k in range(4):
        for mid in itertools.permutations([1, 2, 3], k):
            route = [0, *mid, 4]
            if all((u, v) in adj for u, v in zip(route, route[1:])):
                length = sum(adj[(u, v)] for u, v in zip(route, route[1:]))
                if best is None or length < best[1]:
                    best = (route, length)
    assert best == ([0, 1, 4], 3.0)
    assert shortest_path(net, 0, 4) == best


def test_shortest_path_tie_breaks_to_smaller_index():
    # 0 -> 3 through 1 or 2, both 2 km
    net = RoadNetwork([Point(0, 0), Point(1, 1), Point(1, -1), Point(2, 0)],
                      [(0, 2, 1.0), (2, 3, 1.0), (0, 1, 1.0), (1, 3, 1.0)])
    assert shortest_path(net, 0, 3) == ([0, 1, 3], 2.0)


def test_no_route():
    net = RoadNetwork([Point(0, 0), Point(1, 0), Point(5, 5)], [(0, 1, 1.0)])
    assert not net.is_connected()
    with pytest.raises(NoRouteError):
        net.shortest_path(0, 2)


def test_minimal_scenario_loads(minimal_scenario):
    sc = minimal_scenario
    assert len(sc.buildings) == 2 and len(sc.substations) == 1
    assert len(sc.existing_stations) == 1 and sc.n_vehicles == 1
    assert sc.rho_max == 400.0


def test_load_from_file(tmp_path, minimal_doc):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(minimal_doc))
    assert load_scenario(p).existing_stations[0].id == "S0"


def test_station_outside_domain_names_station(minimal_doc):
    minimal_doc["stations"][0]["x"] = 9.0
    with pytest.raises(ValidationError, match="S0") as exc:
        scenario_from_dict(minimal_doc)
    assert exc.value.path == "stations[0]"


def test_negative_cell_rejected(minimal_doc):
    minimal_doc["raster"]["cells"][2] = -1
    with pytest.raises(ValidationError, match=r"raster\.cells\[2\]"):
        scenario_from_dict(minimal_doc)


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d["buildings"].pop(), "buildings"),
    (lambda d: d["substations"].clear(), "substations"),
    (lambda d: d["fleet"][0].update(count=0), "fleet"),
    (lambda d: d["roads"]["edges"][0].update(length_km=1.0), "roads.edges[0].length_km"),
    (lambda d: d["roads"].update(edges=d["roads"]["edges"][:1]), "roads"),
    (lambda d: d["stations"][0]["ports"][0].update(type=11), "stations[0].ports[0].type"),
    (lambda d: d.pop("domain"), "domain"),
])
def test_validation_errors_carry_field_path(minimal_doc, mutate, path):
    mutate(minimal_doc)
    with pytest.raises(ValidationError) as exc:
        scenario_from_dict(minimal_doc)
    assert exc.value.path == path


def test_scenario_dict_round_trip(minimal_scenario):
    doc = scenario_to_dict(minimal_scenario)
    again = scenario_to_dict(scenario_from_dict(copy.deepcopy(doc)))
    assert doc == again


def test_generate_is_byte_identical():
    cfg = PROFILES["desk"]
    assert dump_scenario(generate_synthetic(cfg, 7)) == dump_scenario(generate_synthetic(cfg, 7))


def test_generate_without_hotspots_is_uniform():
    cfg = SynthConfig(hotspot_weight=0.0, n_vehicles=10)
    sc = generate_synthetic(cfg, 3)
    assert np.all(sc.raster.cells == cfg.base_density)
    assert sc.rho_max == cfg.base_density


def test_generate_station_count():
    cfg = SynthConfig()
    sc = generate_synthetic(cfg, 42)
    assert len(sc.existing_stations) == cfg.n_stations
    assert sc.n_vehicles == cfg.n_vehicles
    assert sc.roads.is_connected()


def test_generate_infeasible_station_count():
    cfg = SynthConfig(width_km=0.4, height_km=0.4, cell_km=0.2, n_stations=5)
    with pytest.raises(GenerationError):
        generate_synthetic(cfg, 0)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_generated_scenarios_satisfy_invariants(seed):
    sc = generate_synthetic(SynthConfig(n_vehicles=10, n_buildings=20), seed)
    for p in (*sc.buildings, *sc.substations, *(s.location for s in sc.existing_stations)):
        assert sc.domain.contains(p)
    assert (sc.raster.cells >= 0).all() and sc.rho_max > 0
    for a, b, w in sc.roads.edges:
        assert w > 0 and w >= distance(sc.roads.nodes[a], sc.roads.nodes[b]) - 1e-9


def test_domain_helpers():
    d = Domain(0, 0, 4, 2)
    assert d.center == Point(2.0, 1.0)
    assert d.on_boundary(Point(4, 1)) and not d.on_boundary(Point(2, 1))
    assert d.clip(Point(5, -1)) == Point(4, 0)
    with pytest.raises(ContractViolation):
        Domain(0, 0, 0, 1)
