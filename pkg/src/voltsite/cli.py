"""Command-line entry point: ``voltsite <command> [options]``.

Exit codes: 0 success, 2 usage or configuration error, 3 input validation
error, 4 runtime error.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

import click
import numpy as np

from . import __version__
from .baselines import (PORT_STRATEGIES, PlacementPlan, assign_ports, place_probabilistic, place_radial,
                        place_voronoi_greedy)
from .dqn import TrainConfig, TrainingError, greedy_rollout, load_checkpoint, new_training_state, \
    run_episodes, save_checkpoint, episode_seed
from .environment import EnvConfig, PlacementEnv, RewardWeights
from .errors import ConfigurationError, ContractViolation, ValidationError, VoltsiteError
from .geodata import PROFILES, Scenario, StationSite, SynthConfig, generate_synthetic, load_scenario, \
    save_scenario, scenario_from_dict, scenario_to_dict
from .metrics import MetricsReport, build_report, cssi, emit_report, gap, line_chart_svg, mean_proximity, mean_wait
from .simulator import SimulationConfig, SimulationResult
from .simulator import run as simulate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4

METHODS = ("original", "voronoi", "radial", "probabilistic", "dqn")
CONFIG_SECTIONS = ("profile", "seed", "synth", "sim", "env", "train", "compare")
COMPARE_DEFAULTS = {"k": [6], "methods": ["original", "voronoi", "radial", "probabilistic"],
                    "seeds": 3, "ports": "random"}


# --------------------------------------------------------------------------- config


def _build(cls, doc: dict, path: str):
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(doc) - set(fields))
    if unknown:
        raise ConfigurationError(f"{path}.{unknown[0]}: unknown field")
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
    try:
        return cls(**clean)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


@dataclasses.dataclass
class RunConfig:
    profile: str = "desk"
    seed: int = 0
    synth: SynthConfig = dataclasses.field(default_factory=SynthConfig)
    sim: SimulationConfig = dataclasses.field(default_factory=SimulationConfig)
    env: EnvConfig = dataclasses.field(default_factory=EnvConfig)
    train: TrainConfig = dataclasses.field(default_factory=TrainConfig)
    compare: dict = dataclasses.field(default_factory=lambda: dict(COMPARE_DEFAULTS))

    def to_dict(self) -> dict:
        env = self.env.to_dict()
        env.pop("sim_config")
        return {
            "profile": self.profile, "seed": self.seed,
            "synth": dataclasses.asdict(self.synth), "sim": self.sim.to_dict(), "env": env,
            "train": dataclasses.asdict(self.train), "compare": self.compare,
        }


def load_config(path: str | None, overrides: dict[str, Any]) -> RunConfig:
    """Defaults, then the JSON file, then command-line overrides."""
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigurationError(f"config: cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config: invalid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigurationError("config: expected a JSON object")
        unknown = sorted(set(doc) - set(CONFIG_SECTIONS))
        if unknown:
            raise ConfigurationError(f"config.{unknown[0]}: unknown field")
    profile = overrides.get("profile") or doc.get("profile", "desk")
    if profile not in PROFILES:
        raise ConfigurationError(f"config.profile: unknown profile {profile!r}")
    seed = overrides.get("seed")
    seed = int(doc.get("seed", 0)) if seed is None else seed

    synth_doc = dataclasses.asdict(PROFILES[profile])
    synth_doc.update(doc.get("synth", {}))
    synth = _build(SynthConfig, synth_doc, "config.synth")

    sim = _build(SimulationConfig, doc.get("sim", {}), "config.sim")

    env_doc = dict(doc.get("env", {}))
    if "sim_config" in env_doc:
        raise ConfigurationError("config.env.sim_config: use the top-level 'sim' section")
    weights = _build(RewardWeights, env_doc.pop("weights", {}), "config.env.weights")
    env = _build(EnvConfig, {**env_doc}, "config.env")
    env = dataclasses.replace(env, weights=weights, sim_config=sim)
    if overrides.get("no_sim"):
        env = dataclasses.replace(env, use_simulation=False)

    train_doc = dict(doc.get("train", {}))
    train_doc.setdefault("seed", seed)
    if overrides.get("seed") is not None:
        train_doc["seed"] = seed
    for key in ("episodes", "steps_per_episode"):
        if overrides.get(key) is not None:
            train_doc[key] = overrides[key]
    train = _build(TrainConfig, train_doc, "config.train")

    compare = dict(COMPARE_DEFAULTS)
    cmp_doc = doc.get("compare", {})
    unknown = sorted(set(cmp_doc) - set(COMPARE_DEFAULTS))
    if unknown:
        raise ConfigurationError(f"config.compare.{unknown[0]}: unknown field")
    compare.update(cmp_doc)
    return RunConfig(profile, seed, synth, sim, env, train, compare)


# --------------------------------------------------------------------------- output plumbing


class Run:
    """Per-invocation bookkeeping: output directory, timings and the manifest."""

    def __init__(self, command: str, out: str, config_path: str | None, cfg: RunConfig, seeds: Sequence[int]):
        self.command = command
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.config_path = config_path
        self.cfg = cfg
        self.seeds = list(seeds)
        self.timings: dict[str, float] = {}
        self.files: list[str] = []
        self.extra: dict[str, Any] = {}
        self._t0 = time.perf_counter()

    def write(self, name: str, text: str) -> Path:
        p = self.out / name
        p.write_text(text)
        self.files.append(name)
        return p

    def track(self, name: str, start: float) -> None:
        self.timings[name] = round(time.perf_counter() - start, 6)

    def finish(self) -> None:
        self.timings["total"] = round(time.perf_counter() - self._t0, 6)
        manifest = {
            "command": self.command,
            "argv": sys.argv[1:],
            "config_file": self.config_path,
            "seeds": self.seeds,
            "output_dir": str(self.out),
            "tool_version": __version__,
            "config": self.cfg.to_dict(),
            "outputs": sorted(set(self.files)),
            "timings_s": self.timings,
            **self.extra,
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def _scenario(path: str | None, cfg: RunConfig) -> Scenario:
    if path is not None:
        return load_scenario(path)
    return generate_synthetic(cfg.synth, cfg.seed)


def _seed_list(seed: int, n: int | None) -> list[int]:
    return [seed] if not n else [seed + i for i in range(n)]


def _workers() -> int:
    raw = os.environ.get("VOLTSITE_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"VOLTSITE_THREADS: not an integer: {raw!r}") from None
    if n < 1:
        raise ConfigurationError("VOLTSITE_THREADS: must be >= 1")
    return n


_WORKER_SCENARIO: Scenario | None = None


def _init_worker(doc: dict) -> None:
    global _WORKER_SCENARIO
    _WORKER_SCENARIO = scenario_from_dict(doc)


def _sim_job(args: tuple) -> SimulationResult:
    stations, sim_cfg, seed, events = args
    return simulate(_WORKER_SCENARIO, stations, sim_cfg, seed=seed, record_events=events)


def simulate_many(scenario: Scenario, jobs: Sequence[tuple[Sequence[StationSite], SimulationConfig, int, bool]]
                  ) -> list[SimulationResult]:
    """Run independent simulations, fanned out over at most VOLTSITE_THREADS processes.

    Results come back in job order so aggregation does not depend on the
    worker count.
    """
    n = min(_workers(), len(jobs))
    if n <= 1:
        return [simulate(scenario, st, c, seed=s, record_events=e) for st, c, s, e in jobs]
    with ProcessPoolExecutor(max_workers=n, initializer=_init_worker,
                             initargs=(scenario_to_dict(scenario),)) as pool:
        return list(pool.map(_sim_job, [tuple(j) for j in jobs]))


def _load_plan(path: str) -> PlacementPlan:
    try:
        doc = json.loads(Path(path).read_text())
        return PlacementPlan.from_dict(doc)
    except OSError as exc:
        raise ValidationError("plan", f"cannot read {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ValidationError("plan", f"malformed plan file: {exc}") from None


# --------------------------------------------------------------------------- click wiring


class VoltsiteGroup(click.Group):
    """Maps library errors onto the documented exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (ConfigurationError, ContractViolation) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_USAGE)
        except ValidationError as exc:
            click.echo(f"invalid input: {exc}", err=True)
            ctx.exit(EXIT_VALIDATION)
        except (VoltsiteError, OSError, ArithmeticError) as exc:
            click.echo(f"runtime error: {exc}", err=True)
            ctx.exit(EXIT_RUNTIME)


def common_options(f: Callable) -> Callable:
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="JSON run configuration."),
        click.option("--seed", type=int, default=None, help="Base seed (overrides the config file)."),
        click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True,
                     help="Output directory."),
        click.option("--profile", type=click.Choice(sorted(PROFILES)), default=None,
                     help="Synthetic scenario profile."),
        click.option("--no-sim", is_flag=True, default=False,
                     help="Score placements with deterministic rewards only."),
        click.option("--emit-events", is_flag=True, default=False, help="Write per-tick event logs."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


@click.group(cls=VoltsiteGroup)
@click.version_option(__version__, prog_name="voltsite")
def main():
    """Charging-station siting with simulation and dual deep Q-learning."""


@main.command()
@common_options
def generate(config_path, seed, out, profile, no_sim, emit_events):
    """Generate a synthetic scenario file."""
    cfg = load_config(config_path, {"seed": seed, "profile": profile})
    run = Run("generate", out, config_path, cfg, [cfg.seed])
    t = time.perf_counter()
    sc = generate_synthetic(cfg.synth, cfg.seed)
    save_scenario(sc, run.out / "scenario.json")
    run.files.append("scenario.json")
    run.track("generate", t)
    run.finish()
    click.echo(str(run.out / "scenario.json"))


@main.command(name="simulate")
@common_options
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False), default=None,
              help="Scenario JSON; generated from the profile when omitted.")
@click.option("--plan", "plan_path", type=click.Path(dir_okay=False), default=None,
              help="Placement plan whose stations are added to the scenario's.")
@click.option("--seeds", type=click.IntRange(min=1), default=None, help="Sweep this many consecutive seeds.")
def simulate_cmd(config_path, seed, out, profile, no_sim, emit_events, scenario_path, plan_path, seeds):
    """Simulate 24 h of traffic on a station set and report wait metrics."""
    if no_sim:
        raise click.UsageError("--no-sim makes no sense for simulate")
    cfg = load_config(config_path, {"seed": seed, "profile": profile})
    seed_list = _seed_list(cfg.seed, seeds)
    run = Run("simulate", out, config_path, cfg, seed_list)
    sc = _scenario(scenario_path, cfg)
    stations = list(sc.existing_stations)
    new_pts = None
    if plan_path:
        plan = _load_plan(plan_path)
        stations += plan.sites("N")
        new_pts = plan.points
    t = time.perf_counter()
    results = simulate_many(sc, [(stations, cfg.sim, s, emit_events) for s in seed_list])
    run.track("simulate", t)
    for s, res in zip(seed_list, results):
        suffix = "" if len(seed_list) == 1 else f"_seed{s}"
        run.write(f"result{suffix}.json", res.to_json() + "\n")
        if emit_events:
            run.write(f"events{suffix}.csv", res.events_csv())
    report = build_report("simulate", seed_list, results, stations,
                          new_stations=new_pts, existing=[s.location for s in sc.existing_stations])
    if len(seed_list) > 1:
        agg = {"seeds": seed_list, "mean_waits": [mean_wait(r) for r in results], "report": report.to_dict()}
        run.write("aggregate.json", json.dumps(agg, indent=1, sort_keys=True) + "\n")
    for p in emit_report(report, run.out, ("json", "csv", "svg"), sc.domain):
        run.files.append(p.name)
    run.finish()
    w = "n/a" if report.wait is None else f"{report.wait:.4f} h"
    click.echo(f"mean wait: {w} over {len(seed_list)} seed(s)")


def _training_svg(history) -> str:
    rewards = [(i, r) for i, r in enumerate(history.episode_rewards)]
    loss = [(r[0], r[2]) for r in history.rows if r[2] is not None]
    return (line_chart_svg({"episode reward": rewards}, "Training reward", "episode", "reward")
            + "\n<!-- loss -->\n"
            + line_chart_svg({"location loss": loss}, "Training loss", "step", "mse"))


@main.command(name="train")
@common_options
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False), default=None)
@click.option("--episodes", type=click.IntRange(min=0), default=None)
@click.option("--steps", type=click.IntRange(min=1), default=None, help="Stations placed per episode.")
@click.option("--resume", "resume_path", type=click.Path(dir_okay=False), default=None,
              help="Continue from a checkpoint written by an earlier run.")
def train_cmd(config_path, seed, out, profile, no_sim, emit_events, scenario_path, episodes, steps, resume_path):
    """Train the dual Q-networks and emit a greedy placement plan."""
    cfg = load_config(config_path, {"seed": seed, "profile": profile, "no_sim": no_sim,
                                    "episodes": episodes, "steps_per_episode": steps})
    run = Run("train", out, config_path, cfg, [cfg.train.seed])
    sc = _scenario(scenario_path, cfg)
    env = PlacementEnv(sc, cfg.env)
    if resume_path:
        state = load_checkpoint(resume_path)
        if state.agent.config.seed != cfg.train.seed:
            raise ConfigurationError("train.seed: differs from the checkpoint's seed")
        state.agent.config = cfg.train
        run.extra["resumed_from"] = str(resume_path)
    else:
        state = new_training_state(cfg.train, cfg.env)
    t = time.perf_counter()

    def progress(ep: int, reward: float) -> None:
        click.echo(f"episode {ep + 1}/{cfg.train.episodes} reward {reward:.3f}", err=True)

    try:
        run_episodes(env, state, cfg.train, progress=progress)
    except TrainingError:
        save_checkpoint(state, run.out / "checkpoint.json")
        raise
    run.track("train", t)
    save_checkpoint(state, run.out / "checkpoint.json")
    run.files.append("checkpoint.json")
    run.write("history.csv", state.history.to_csv())
    run.write("training.svg", _training_svg(state.history))
    plan, _ = greedy_rollout(state.agent, env, cfg.train.steps_per_episode, episode_seed(cfg.train.seed, 0))
    run.write("plan.json", plan.to_json() + "\n")
    run.finish()
    click.echo(f"trained {state.episode} episode(s); plan with {len(plan)} station(s)")


@main.command()
@common_options
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False), default=None)
@click.option("--checkpoint", "ckpt", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--k", type=click.IntRange(min=1), default=None, help="Stations to place.")
def place(config_path, seed, out, profile, no_sim, emit_events, scenario_path, ckpt, k):
    """Greedy placement rollout from a trained checkpoint."""
    cfg = load_config(config_path, {"seed": seed, "profile": profile, "no_sim": no_sim})
    run = Run("place", out, config_path, cfg, [cfg.seed])
    sc = _scenario(scenario_path, cfg)
    state = load_checkpoint(ckpt)
    env_cfg = state.env_config if state.env_config is not None else cfg.env
    if no_sim:
        env_cfg = dataclasses.replace(env_cfg, use_simulation=False)
    env = PlacementEnv(sc, env_cfg)
    steps = k or state.agent.config.steps_per_episode
    plan, rewards = greedy_rollout(state.agent, env, steps, episode_seed(state.agent.config.seed, 0))
    run.write("plan.json", plan.to_json() + "\n")
    run.extra["rewards"] = [r.total for r in rewards]
    run.finish()
    click.echo(f"placed {len(plan)} station(s)")


def method_plan(method: str, sc: Scenario, k: int, seed: int, cfg: RunConfig, ports: str,
                agent_state=None) -> PlacementPlan:
    n_ports = cfg.env.ports_per_station
    if method == "original":
        return PlacementPlan([], "original", seed)
    if method == "voronoi":
        base = place_voronoi_greedy(sc, k, env_config=cfg.env)
    elif method == "radial":
        base = place_radial(sc, k, seed, port_count=n_ports)
    elif method == "probabilistic":
        base = place_probabilistic(sc, k, seed, port_count=n_ports)
    elif method == "dqn":
        # roll out under the training-time env so wait features match what the agent saw
        env_cfg = agent_state.env_config or cfg.env
        if not cfg.env.use_simulation:
            env_cfg = dataclasses.replace(env_cfg, use_simulation=False)
        env = PlacementEnv(sc, env_cfg)
        plan, _ = greedy_rollout(agent_state.agent, env, k, episode_seed(agent_state.agent.config.seed, 0))
        return plan
    else:
        raise click.UsageError(f"unknown method {method!r}")
    return assign_ports(base, ports, sc, seed, n_ports)


COMPARE_COLUMNS = ("method", "k", "wait_mean_h", "wait_median_h", "gap_pct", "total_charging_h",
                   "proximity_km", "cssi", "waits_per_seed")


@main.command()
@common_options
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False), default=None)
@click.option("--k", "ks", type=str, default=None, help="Comma-separated station counts, e.g. 2,4,6.")
@click.option("--methods", type=str, default=None, help=f"Comma-separated subset of {', '.join(METHODS)}.")
@click.option("--seeds", type=click.IntRange(min=1), default=None, help="Number of consecutive seeds.")
@click.option("--ports", type=click.Choice(PORT_STRATEGIES), default=None, help="Baseline port assignment.")
@click.option("--checkpoint", "ckpt", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Trained agent, required for the dqn method.")
def compare(config_path, seed, out, profile, no_sim, emit_events, scenario_path, ks, methods, seeds, ports, ckpt):
    """Tabulate wait, gap, proximity and CSSI for several placement methods."""
    cfg = load_config(config_path, {"seed": seed, "profile": profile, "no_sim": no_sim})
    c = cfg.compare
    try:
        k_list = [int(x) for x in ks.split(",")] if ks else [int(x) for x in c["k"]]
    except ValueError:
        raise click.UsageError(f"--k: expected comma-separated integers, got {ks!r}") from None
    if not k_list or min(k_list) < 1:
        raise click.UsageError("--k: station counts must be >= 1")
    method_list = [m.strip() for m in methods.split(",")] if methods else list(c["methods"])
    bad = [m for m in method_list if m not in METHODS]
    if bad:
        raise click.UsageError(f"unknown method {bad[0]!r}; choose from {', '.join(METHODS)}")
    if "dqn" in method_list and ckpt is None:
        raise click.UsageError("the dqn method needs --checkpoint")
    port_rule = ports or c["ports"]
    seed_list = _seed_list(cfg.seed, seeds or int(c["seeds"]))
    cfg.compare = {"k": k_list, "methods": method_list, "seeds": len(seed_list), "ports": port_rule}
    run = Run("compare", out, config_path, cfg, seed_list)
    sc = _scenario(scenario_path, cfg)
    agent_state = load_checkpoint(ckpt) if ckpt else None
    existing = list(sc.existing_stations)

    t = time.perf_counter()
    cells = []  # (method, k, [plans per seed])
    for m in method_list:
        for k in ([0] if m == "original" else k_list):
            cells.append((m, k, [method_plan(m, sc, k, s, cfg, port_rule, agent_state) for s in seed_list]))
    run.track("placement", t)

    t = time.perf_counter()
    waits: dict[tuple[str, int], list[float | None]] = {}
    charging: dict[tuple[str, int], float] = {}
    if not no_sim:
        jobs = [(existing + plan.sites("N"), cfg.sim, s, emit_events)
                for _, _, plans in cells for plan, s in zip(plans, seed_list)]
        results = iter(simulate_many(sc, jobs))
        for m, k, plans in cells:
            rs = [next(results) for _ in plans]
            waits[(m, k)] = [mean_wait(r) for r in rs]
            charging[(m, k)] = float(np.mean([r.total_charging_hours for r in rs]))
            if emit_events:
                for s, r in zip(seed_list, rs):
                    run.write(f"events_{m}_k{k}_seed{s}.csv", r.events_csv())
    run.track("simulate", t)

    def _median(xs):
        xs = [x for x in xs if x is not None]
        return float(np.median(xs)) if xs else None

    def _mean(xs):
        xs = [x for x in xs if x is not None]
        return float(np.mean(xs)) if xs else None

    base_runs = waits.get(("original", 0))
    if base_runs is None and not no_sim:
        base_runs = [mean_wait(r) for r in simulate_many(sc, [(existing, cfg.sim, s, False) for s in seed_list])]
    base = _mean(base_runs) if base_runs else None

    rows = []
    for m, k, plans in cells:
        w = waits.get((m, k), [])
        wm = _mean(w)
        new = plans[0].points
        rows.append({
            "method": m,
            "k": k,
            "wait_mean_h": wm,
            "wait_median_h": _median(w),
            "gap_pct": gap(base, wm) if base and wm is not None else None,
            "total_charging_h": charging.get((m, k)),
            "proximity_km": float(np.mean([mean_proximity(p.points, [s.location for s in existing])
                                           for p in plans])) if new and existing else None,
            "cssi": float(np.mean([cssi(p.sites()) for p in plans])) if new else None,
            "waits_per_seed": w,
        })
    run.extra["baseline_wait_h"] = base
    run.write("comparison.json", json.dumps({"baseline_wait_h": base, "seeds": seed_list, "rows": rows},
                                            indent=1, sort_keys=True) + "\n")
    run.write("comparison.csv", comparison_csv(rows))
    run.write("trend.svg", trend_svg(rows, base))
    for m, k, plans in cells:
        if plans[0].stations:
            run.write(f"plan_{m}_k{k}.json", plans[0].to_json() + "\n")
    run.finish()
    for r in rows:
        w = "n/a" if r["wait_mean_h"] is None else f"{r['wait_mean_h']:.4f}"
        g = "n/a" if r["gap_pct"] is None else f"{r['gap_pct']:.2f}%"
        click.echo(f"{r['method']:>14} k={r['k']:<3} wait={w} gap={g}")


def comparison_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS)
    for r in rows:
        vals = []
        for col in COMPARE_COLUMNS:
            v = r[col]
            if col == "waits_per_seed":
                v = ";".join("" if x is None else repr(x) for x in v)
            vals.append("" if v is None else v)
        w.writerow(vals)
    return buf.getvalue()


def trend_svg(rows: Sequence[dict], base: float | None) -> str:
    series: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        if r["method"] == "original" or r["wait_mean_h"] is None:
            continue
        pts = series.setdefault(r["method"], [(0.0, base)] if base is not None else [])
        pts.append((float(r["k"]), r["wait_mean_h"]))
    for pts in series.values():
        pts.sort()
    return line_chart_svg(series, "Mean wait vs added stations", "stations added", "mean wait (h)")


@main.command()
@common_options
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="A report.json from simulate or a comparison.json from compare.")
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False), default=None,
              help="Scenario for the station map; generated from the profile when omitted.")
def report(config_path, seed, out, profile, no_sim, emit_events, input_path, scenario_path):
    """Re-emit JSON, CSV and SVG artifacts from a saved report."""
    cfg = load_config(config_path, {"seed": seed, "profile": profile})
    run = Run("report", out, config_path, cfg, [cfg.seed])
    try:
        doc = json.loads(Path(input_path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError("input", f"invalid JSON: {exc}") from None
    if isinstance(doc, dict) and "rows" in doc:
        run.write("comparison.csv", comparison_csv(doc["rows"]))
        run.write("trend.svg", trend_svg(doc["rows"], doc.get("baseline_wait_h")))
    else:
        try:
            rep = MetricsReport.from_dict(doc)
        except (TypeError, KeyError) as exc:
            raise ValidationError("input", f"not a metrics report: {exc}") from None
        sc = _scenario(scenario_path, cfg)
        for p in emit_report(rep, run.out, ("json", "csv", "svg"), sc.domain):
            run.files.append(p.name)
    run.finish()
    click.echo(f"wrote {len(run.files)} file(s) to {run.out}")


if __name__ == "__main__":  # pragma: no cover
    main()
