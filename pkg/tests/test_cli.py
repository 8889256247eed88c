import csv
import io
import json

import pytest
from click.testing import CliRunner

from voltsite.cli import main
from voltsite.geodata import load_scenario


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("VOLTSITE_THREADS", "1")


def invoke(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture(scope="module")
def scenario_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen")
    assert invoke("generate", "--seed", 1, "--out", out).exit_code == 0
    return out / "scenario.json"


# ---------------------------------------------------------------- generate


def test_generate_valid_and_reproducible(tmp_path, scenario_file):
    res = invoke("generate", "--seed", 1, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    sc = load_scenario(tmp_path / "scenario.json")
    assert len(sc.existing_stations) == 6 and sc.n_vehicles == 200
    assert (tmp_path / "scenario.json").read_bytes() == scenario_file.read_bytes()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "generate" and manifest["seeds"] == [1]
    assert "scenario.json" in manifest["outputs"] and "total" in manifest["timings_s"]


def test_generate_bad_config_field(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", {"synth": {"n_vehicels": 10}})
    res = CliRunner().invoke(main, ["generate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert res.exit_code == 2
    assert "config.synth.n_vehicels" in res.output


def test_config_file_and_flag_precedence(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", {"seed": 5, "synth": {"n_vehicles": 50}})
    assert invoke("generate", "--config", cfg, "--seed", 9, "--out", tmp_path / "o").exit_code == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["seeds"] == [9]
    assert manifest["config"]["synth"]["n_vehicles"] == 50
    assert load_scenario(tmp_path / "o" / "scenario.json").n_vehicles == 50


def test_unknown_top_level_config_section(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", {"simulation": {}})
    res = CliRunner().invoke(main, ["generate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert res.exit_code == 2 and "config.simulation" in res.output


def test_generation_failure_is_runtime_error(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", {"synth": {"width_km": 0.4, "height_km": 0.4, "cell_km": 0.2,
                                                       "n_stations": 5}})
    res = CliRunner().invoke(main, ["generate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert res.exit_code == 4


def test_invalid_scenario_is_validation_error(tmp_path, minimal_doc):
    minimal_doc["stations"][0]["x"] = 99
    bad = write_json(tmp_path / "bad.json", minimal_doc)
    res = CliRunner().invoke(main, ["simulate", "--scenario", str(bad), "--out", str(tmp_path / "o")])
    assert res.exit_code == 3 and "stations[0]" in res.output


def test_bad_thread_setting(tmp_path, monkeypatch, scenario_file):
    monkeypatch.setenv("VOLTSITE_THREADS", "zero")
    res = CliRunner().invoke(main, ["simulate", "--scenario", str(scenario_file), "--seeds", "2",
                                    "--out", str(tmp_path)])
    assert res.exit_code == 2 and "VOLTSITE_THREADS" in res.output


# ---------------------------------------------------------------- simulate


def test_simulate_with_events(tmp_path, scenario_file):
    res = invoke("simulate", "--scenario", scenario_file, "--emit-events", "--out", tmp_path)
    assert res.exit_code == 0, res.output
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["mean_wait"] >= 0 and result["n_sessions"] > 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "events.csv").read_text())))
    assert rows and {"tick", "vehicle_id", "event"} <= set(rows[0])
    for name in ("report.json", "report_stations.csv", "report_map.svg", "manifest.json"):
        assert (tmp_path / name).exists()


def test_simulate_seed_sweep(tmp_path, scenario_file):
    res = invoke("simulate", "--scenario", scenario_file, "--seeds", 5, "--seed", 10, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    assert sorted(p.name for p in tmp_path.glob("result_seed*.json")) == [f"result_seed{s}.json"
                                                                        for s in range(10, 15)]
    agg = json.loads((tmp_path / "aggregate.json").read_text())
    assert agg["seeds"] == list(range(10, 15)) and len(agg["mean_waits"]) == 5


def test_simulate_results_independent_of_worker_count(tmp_path, scenario_file, monkeypatch):
    invoke("simulate", "--scenario", scenario_file, "--seeds", 2, "--out", tmp_path / "one")
    monkeypatch.setenv("VOLTSITE_THREADS", "2")
    invoke("simulate", "--scenario", scenario_file, "--seeds", 2, "--out", tmp_path / "two")
    for name in ("result_seed0.json", "result_seed1.json", "aggregate.json"):
        assert (tmp_path / "one" / name).read_text() == (tmp_path / "two" / name).read_text()


def test_simulate_with_plan(tmp_path, scenario_file):
    plan = write_json(tmp_path / "plan.json", {"method": "hand", "seed": 0, "stations": [
        {"x": 2.0, "y": 2.0, "port_type": 8, "port_count": 4}]})
    res = invoke("simulate", "--scenario", scenario_file, "--plan", plan, "--out", tmp_path / "o")
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert len(report["stations"]) == 7 and report["mean_proximity"] is not None


def test_simulate_malformed_plan(tmp_path, scenario_file):
    plan = write_json(tmp_path / "plan.json", {"stations": [{"x": 1}]})
    res = CliRunner().invoke(main, ["simulate", "--scenario", str(scenario_file), "--plan", str(plan),
                                    "--out", str(tmp_path / "o")])
    assert res.exit_code == 3


# ---------------------------------------------------------------- train / place


def train_args(out, *extra):
    return ("train", "--no-sim", "--seed", 3, "--out", out, *extra)


def test_train_smoke(tmp_path, scenario_file):
    res = invoke(*train_args(tmp_path, "--scenario", scenario_file, "--episodes", 1, "--steps", 2))
    assert res.exit_code == 0, res.output
    lines = (tmp_path / "history.csv").read_text().splitlines()
    assert len(lines) == 1 + 2
    plan = json.loads((tmp_path / "plan.json").read_text())
    assert len(plan["stations"]) == 2
    for name in ("checkpoint.json", "training.svg", "manifest.json"):
        assert (tmp_path / name).exists()


def test_train_no_sim_reproducible(tmp_path, scenario_file):
    for d in ("a", "b"):
        assert invoke(*train_args(tmp_path / d, "--scenario", scenario_file, "--episodes", 2,
                                  "--steps", 3)).exit_code == 0
    for name in ("history.csv", "plan.json", "checkpoint.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_train_resume_matches_unbroken(tmp_path, scenario_file):
    common = ("--scenario", scenario_file, "--steps", 3)
    assert invoke(*train_args(tmp_path / "full", *common, "--episodes", 4)).exit_code == 0
    assert invoke(*train_args(tmp_path / "half", *common, "--episodes", 2)).exit_code == 0
    res = invoke(*train_args(tmp_path / "rest", *common, "--episodes", 4,
                             "--resume", tmp_path / "half" / "checkpoint.json"))
    assert res.exit_code == 0, res.output
    for name in ("history.csv", "plan.json"):
        assert (tmp_path / "full" / name).read_bytes() == (tmp_path / "rest" / name).read_bytes()


def test_place_from_checkpoint(tmp_path, scenario_file):
    invoke(*train_args(tmp_path / "t", "--scenario", scenario_file, "--episodes", 1, "--steps", 2))
    res = invoke("place", "--no-sim", "--scenario", scenario_file, "--checkpoint",
                 tmp_path / "t" / "checkpoint.json", "--k", 3, "--out", tmp_path / "p")
    assert res.exit_code == 0, res.output
    assert len(json.loads((tmp_path / "p" / "plan.json").read_text())["stations"]) == 3


# ---------------------------------------------------------------- compare / report


def test_compare_original_only(tmp_path, scenario_file):
    res = invoke("compare", "--scenario", scenario_file, "--methods", "original", "--seeds", 2, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    doc = json.loads((tmp_path / "comparison.json").read_text())
    assert [r["method"] for r in doc["rows"]] == ["original"]
    assert doc["rows"][0]["gap_pct"] == 0.0


def test_compare_table_shape_and_rerun(tmp_path, scenario_file):
    args = ("compare", "--scenario", scenario_file, "--methods", "original,voronoi,radial,probabilistic",
            "--k", "1,2", "--seeds", 2)
    assert invoke(*args, "--out", tmp_path / "a").exit_code == 0
    assert invoke(*args, "--out", tmp_path / "b").exit_code == 0
    doc = json.loads((tmp_path / "a" / "comparison.json").read_text())
    keys = [(r["method"], r["k"]) for r in doc["rows"]]
    assert keys == [("original", 0)] + [(m, k) for m in ("voronoi", "radial", "probabilistic") for k in (1, 2)]
    assert len(set(keys)) == len(keys)
    csv_rows = (tmp_path / "a" / "comparison.csv").read_text().splitlines()
    assert len(csv_rows) == len(keys) + 1
    for name in ("comparison.json", "comparison.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_compare_unknown_method(tmp_path, scenario_file):
    res = CliRunner().invoke(main, ["compare", "--scenario", str(scenario_file), "--methods", "magic",
                                    "--out", str(tmp_path)])
    assert res.exit_code == 2 and "magic" in res.output


def test_compare_dqn_needs_checkpoint(tmp_path, scenario_file):
    res = CliRunner().invoke(main, ["compare", "--scenario", str(scenario_file), "--methods", "dqn",
                                    "--out", str(tmp_path)])
    assert res.exit_code == 2


def test_compare_no_sim_skips_waits(tmp_path, scenario_file):
    res = invoke("compare", "--no-sim", "--scenario", scenario_file, "--methods", "voronoi", "--k", 2,
                 "--seeds", 1, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    (row,) = json.loads((tmp_path / "comparison.json").read_text())["rows"]
    assert row["wait_mean_h"] is None and row["cssi"] is not None and row["proximity_km"] is not None


def test_report_reemits(tmp_path, scenario_file):
    invoke("simulate", "--scenario", scenario_file, "--out", tmp_path / "s")
    res = invoke("report", "--input", tmp_path / "s" / "report.json", "--scenario", scenario_file,
                 "--out", tmp_path / "r")
    assert res.exit_code == 0, res.output
    assert (tmp_path / "r" / "report.json").read_text() == (tmp_path / "s" / "report.json").read_text()
    assert (tmp_path / "r" / "report_map.svg").exists()


def test_version():
    res = invoke("--version")
    assert res.exit_code == 0 and "voltsite" in res.output
