import copy

import numpy as np
import pytest

from voltsite.geodata import PROFILES, generate_synthetic, scenario_from_dict

MINIMAL_DOC = {
    "domain": {"xmin": 0, "ymin": 0, "xmax": 4, "ymax": 4},
    "raster": {"origin": {"x": 0, "y": 0}, "cell_size_km": 2.0, "rows": 2, "cols": 2,
               "cells": [100, 200, 300, 400]},
    "roads": {"nodes": [{"x": 0, "y": 0}, {"x": 4, "y": 0}, {"x": 4, "y": 4}, {"x": 0, "y": 4}],
              "edges": [{"a": 0, "b": 1, "length_km": 4}, {"a": 1, "b": 2, "length_km": 4},
                        {"a": 2, "b": 3, "length_km": 4}, {"a": 3, "b": 0, "length_km": 4}]},
    "buildings": [{"x": 0.5, "y": 0.5}, {"x": 3.5, "y": 3.5}],
    "substations": [{"x": 2, "y": 2}],
    "stations": [{"id": "S0", "x": 1, "y": 1, "ports": [{"type": 5, "count": 1}]}],
    "fleet": [{"model": "m", "capacity_kwh": 42, "consumption_kwh_per_km": 0.15, "count": 1}],
}


def toy_dominant_doc():
    """10 km square with one dense cell at the substation, three stations around it."""
    cells = np.full((10, 10), 100.0)
    cells[5, 5] = 5000.0
    return {
        "domain": {"xmin": 0, "ymin": 0, "xmax": 10, "ymax": 10},
        "raster": {"origin": [0, 0], "cell_size_km": 1.0, "rows": 10, "cols": 10,
                   "cells": cells.ravel().tolist()},
        "roads": {"nodes": [[0, 0], [10, 0], [10, 10], [0, 10]], "edges": [[0, 1], [1, 2], [2, 3], [3, 0]]},
        "buildings": [[1, 1], [9, 9]],
        "substations": [[5, 5]],
        "stations": [{"id": "A", "x": 3, "y": 3, "ports": [{"type": 5, "count": 2}]},
                     {"id": "B", "x": 7, "y": 3, "ports": [{"type": 5, "count": 2}]},
                     {"id": "C", "x": 3, "y": 7, "ports": [{"type": 5, "count": 2}]}],
        "fleet": [{"model": "m", "capacity_kwh": 42, "consumption_kwh_per_km": 0.15, "count": 1}],
    }


def two_vehicle_doc(n_vehicles=2, consumption=0.15):
    """Station midway between two buildings on a straight 2 km road."""
    return {
        "domain": {"xmin": 0, "ymin": 0, "xmax": 2, "ymax": 2},
        "raster": {"origin": [0, 0], "cell_size_km": 1.0, "rows": 2, "cols": 2, "cells": [1, 1, 1, 1]},
        "roads": {"nodes": [[0, 1], [1, 1], [2, 1]], "edges": [[0, 1], [1, 2]]},
        "buildings": [[0, 1], [2, 1]],
        "substations": [[1, 1]],
        "stations": [{"id": "S", "x": 1, "y": 1, "ports": [{"type": 5, "count": 1}]}],
        "fleet": [{"model": "m", "capacity_kwh": 42, "consumption_kwh_per_km": consumption,
                   "count": n_vehicles}],
    }


@pytest.fixture
def minimal_doc():
    return copy.deepcopy(MINIMAL_DOC)


@pytest.fixture
def minimal_scenario():
    return scenario_from_dict(copy.deepcopy(MINIMAL_DOC))


@pytest.fixture(scope="session")
def toy_scenario():
    return scenario_from_dict(toy_dominant_doc())


@pytest.fixture(scope="session")
def desk_scenario():
    return generate_synthetic(PROFILES["desk"], 0)
