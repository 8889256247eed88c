"""Dual deep-Q agent for station placement.

The location network scores each candidate from its own feature vector (one
scalar output), so it copes with a candidate set whose size changes every
step.  The port network maps the chosen candidate's features to ten Q-values,
one per port type.  Both have target copies tracked by soft updates and learn
from a shared replay buffer.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .baselines import PlacementPlan, PlannedStation
from .catalog import N_PORT_TYPES
from .environment import (
    Action,
    EnvConfig,
    PlacementEnv,
    RewardBreakdown,
    StateVector,
    deterministic_reward,
)
from .errors import ContractViolation, VoltsiteError
from .geodata import Point, Scenario
from .neuralnet import Network, OptimizerState, soft_update, update

STATE_SIZE = 5
D_SCALE_KM = 10.0
N_SCALE = 10.0
T_SCALE_H = 5.0

STREAM_ACTIONS = 10
STREAM_REPLAY = 11
STREAM_RESET = 12
STREAM_INIT = 13


def normalize(state: StateVector, rho_max: float) -> np.ndarray:
    return np.array([
        state.d_nearest / D_SCALE_KM,
        state.d_nearest_sub / D_SCALE_KM,
        state.rho / rho_max,
        state.n_stations / N_SCALE,
        state.t_avg / T_SCALE_H,
    ])


def normalize_all(states: Sequence[StateVector], rho_max: float) -> np.ndarray:
    if not states:
        return np.zeros((0, STATE_SIZE))
    return np.array([s.as_tuple() for s in states], dtype=float) / np.array(
        [D_SCALE_KM, D_SCALE_KM, rho_max, N_SCALE, T_SCALE_H])


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 100
    steps_per_episode: int = 10
    gamma: float = 0.99
    epsilon_init: float = 1.0
    epsilon_decay: float = 0.995
    epsilon_min: float = 0.05
    batch: int = 8
    lr_alpha: float = 0.001
    lr_beta: float = 0.001
    tau_soft: float = 0.005
    replay_capacity: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ContractViolation("gamma must lie in (0, 1)")
        if not 0.0 <= self.epsilon_min <= self.epsilon_init <= 1.0:
            raise ContractViolation("need 0 <= epsilon_min <= epsilon_init <= 1")
        if self.episodes < 0 or self.steps_per_episode < 1 or self.batch < 1 or self.replay_capacity < 1:
            raise ContractViolation("episodes >= 0, steps/batch/replay capacity >= 1 required")

    def epsilon(self, t: int) -> float:
        return max(self.epsilon_min, self.epsilon_init * self.epsilon_decay ** t)

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ContractViolation(f"unknown train config field(s): {sorted(unknown)}")
        return cls(**doc)


@dataclass
class Transition:
    state: np.ndarray          # normalized features of the chosen candidate
    loc: Point
    port: int
    reward: float
    next_states: np.ndarray    # normalized features of every next candidate
    terminal: bool

    def to_dict(self) -> dict:
        return {"state": self.state.tolist(), "loc": [self.loc.x, self.loc.y], "port": self.port,
                "reward": self.reward, "next_states": self.next_states.tolist(), "terminal": self.terminal}

    @classmethod
    def from_dict(cls, d: dict) -> "Transition":
        return cls(np.array(d["state"], dtype=float), Point(*d["loc"]), int(d["port"]), d["reward"],
                   np.array(d["next_states"], dtype=float).reshape(-1, STATE_SIZE), bool(d["terminal"]))


class ReplayBuffer:
    """Bounded FIFO of transitions with a seeded uniform sampler."""

    def __init__(self, capacity: int = 10_000, seed: int | np.random.Generator = 0):
        if capacity < 1:
            raise ContractViolation("replay capacity must be >= 1")
        self.capacity = capacity
        self.items: deque[Transition] = deque(maxlen=capacity)
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def __len__(self) -> int:
        return len(self.items)

    def push(self, t: Transition) -> None:
        self.items.append(t)

    def sample(self, batch: int) -> list[Transition]:
        if batch > len(self.items):
            raise ContractViolation("not enough transitions to sample a batch")
        idx = self.rng.choice(len(self.items), size=batch, replace=False)
        return [self.items[int(i)] for i in idx]


class Agent:
    def __init__(self, config: TrainConfig = TrainConfig(), seed: int | None = None):
        seed = config.seed if seed is None else seed
        init = np.random.default_rng([seed, STREAM_INIT])
        s1, s2 = (int(x) for x in init.integers(0, 2**31, size=2))
        self.config = config
        self.q_loc = Network.q_network(STATE_SIZE, 1, seed=s1)
        self.q_loc_target = self.q_loc.copy()
        self.q_port = Network.q_network(STATE_SIZE, N_PORT_TYPES, seed=s2)
        self.q_port_target = self.q_port.copy()
        self.opt_loc = OptimizerState.for_network(self.q_loc, config.lr_alpha)
        self.opt_port = OptimizerState.for_network(self.q_port, config.lr_beta)

    def networks(self) -> dict[str, Network]:
        return {"loc": self.q_loc, "loc_target": self.q_loc_target,
                "port": self.q_port, "port_target": self.q_port_target}

    def to_dict(self) -> dict:
        return {
            "networks": {k: n.to_dict() for k, n in self.networks().items()},
            "optimizers": {"loc": self.opt_loc.to_dict(), "port": self.opt_port.to_dict()},
            "train_config": asdict(self.config),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Agent":
        agent = cls.__new__(cls)
        agent.config = TrainConfig.from_dict(doc["train_config"])
        nets = doc["networks"]
        agent.q_loc = Network.from_dict(nets["loc"])
        agent.q_loc_target = Network.from_dict(nets["loc_target"])
        agent.q_port = Network.from_dict(nets["port"])
        agent.q_port_target = Network.from_dict(nets["port_target"])
        agent.opt_loc = OptimizerState.from_dict(doc["optimizers"]["loc"], agent.q_loc)
        agent.opt_port = OptimizerState.from_dict(doc["optimizers"]["port"], agent.q_port)
        return agent


# --------------------------------------------------------------------------- acting


def select_location(q_loc: Network, candidate_states: np.ndarray, epsilon: float,
                    rng: np.random.Generator) -> int:
    """Epsilon-greedy over candidates scored one by one; ties go to the lowest index."""
    states = np.asarray(candidate_states, dtype=float)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ContractViolation("select_location needs a non-empty candidate list")
    if rng.random() < epsilon:
        return int(rng.integers(states.shape[0]))
    scores = q_loc.forward(states, cache=False)[:, 0]
    return int(np.argmax(scores))


def select_port(q_port: Network, state: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy port type in 1..10; ties go to the lowest type."""
    if rng.random() < epsilon:
        return int(rng.integers(N_PORT_TYPES)) + 1
    q = q_port.forward(np.asarray(state, dtype=float), cache=False)
    return int(np.argmax(q)) + 1


# --------------------------------------------------------------------------- learning


def _discounted(reward: float, gamma: float, value: float) -> float:
    """reward + gamma * value with a single rounding."""
    fma = getattr(math, "fma", None)
    if fma is not None:
        return fma(gamma, value, reward)
    return float(Fraction(reward) + Fraction(gamma) * Fraction(value))


def td_target_loc(t: Transition, q_loc_target: Network, gamma: float) -> float:
    if t.terminal or t.next_states.shape[0] == 0:
        return float(t.reward)
    scores = q_loc_target.forward(t.next_states, cache=False)[:, 0]
    return _discounted(float(t.reward), gamma, float(scores.max()))


def next_port_state(t: Transition, q_loc_target: Network) -> np.ndarray:
    """The next candidate the target location network would pick."""
    scores = q_loc_target.forward(t.next_states, cache=False)[:, 0]
    return t.next_states[int(np.argmax(scores))]


def td_target_port(t: Transition, q_port_target: Network, gamma: float,
                   q_loc_target: Network | None = None) -> float:
    if t.terminal or t.next_states.shape[0] == 0:
        return float(t.reward)
    s_next = next_port_state(t, q_loc_target) if q_loc_target is not None else t.next_states[0]
    return _discounted(float(t.reward), gamma, float(q_port_target.forward(s_next, cache=False).max()))


def _batch_targets(batch: Sequence[Transition], agent: Agent, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized td_target_loc / td_target_port for a whole batch."""
    y_loc = np.array([t.reward for t in batch], dtype=float)
    y_port = y_loc.copy()
    live = [i for i, t in enumerate(batch) if not t.terminal and t.next_states.shape[0]]
    if live:
        stacked = np.vstack([batch[i].next_states for i in live])
        scores = agent.q_loc_target.forward(stacked, cache=False)[:, 0]
        chosen = []
        start = 0
        for i in live:
            n = batch[i].next_states.shape[0]
            seg = scores[start:start + n]
            k = int(np.argmax(seg))
            y_loc[i] += gamma * seg[k]
            chosen.append(batch[i].next_states[k])
            start += n
        q_next = agent.q_port_target.forward(np.array(chosen), cache=False).max(axis=1)
        y_port[live] += gamma * q_next
    return y_loc, y_port


def train_step(agent: Agent, replay: ReplayBuffer, batch: int, config: TrainConfig) -> tuple[float, float] | None:
    """One alternating update of both networks; ``None`` when replay is too small."""
    if len(replay) < batch:
        return None
    sample = replay.sample(batch)
    y_loc, y_port = _batch_targets(sample, agent, config.gamma)
    states = np.array([t.state for t in sample])

    q = agent.q_loc.forward(states)[:, 0]
    err = q - y_loc
    loss_loc = float(np.mean(err ** 2))
    grads = agent.q_loc.backward((2.0 / batch * err)[:, None])
    update(agent.q_loc, grads, agent.opt_loc)

    qp = agent.q_port.forward(states)
    cols = np.array([t.port - 1 for t in sample])
    err_p = qp[np.arange(batch), cols] - y_port
    loss_port = float(np.mean(err_p ** 2))
    g = np.zeros_like(qp)
    g[np.arange(batch), cols] = 2.0 / batch * err_p
    update(agent.q_port, agent.q_port.backward(g), agent.opt_port)

    soft_update(agent.q_loc_target, agent.q_loc, config.tau_soft)
    soft_update(agent.q_port_target, agent.q_port, config.tau_soft)
    return loss_loc, loss_port


# --------------------------------------------------------------------------- training loop


HISTORY_COLUMNS = ("step", "episode", "loss_loc", "loss_port", "epsilon", "reward")


@dataclass
class TrainingHistory:
    rows: list[tuple] = field(default_factory=list)  # one per environment step
    episode_rewards: list[float] = field(default_factory=list)

    @property
    def loss_loc(self) -> list[float | None]:
        return [r[2] for r in self.rows]

    @property
    def loss_port(self) -> list[float | None]:
        return [r[3] for r in self.rows]

    @property
    def epsilon(self) -> list[float]:
        return [r[4] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HISTORY_COLUMNS)
        for r in self.rows:
            w.writerow(["" if v is None else v for v in r])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"rows": [list(r) for r in self.rows], "episode_rewards": self.episode_rewards}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingHistory":
        return cls([tuple(r) for r in d["rows"]], list(d["episode_rewards"]))


@dataclass
class TrainingState:
    """Everything needed to continue training exactly where it stopped."""

    agent: Agent
    replay: ReplayBuffer
    rng: np.random.Generator
    history: TrainingHistory
    episode: int = 0
    global_step: int = 0
    env_config: EnvConfig | None = None

    def to_dict(self) -> dict:
        doc = self.agent.to_dict()
        doc["progress"] = {
            "episode": self.episode,
            "global_step": self.global_step,
            "rng": self.rng.bit_generator.state,
            "replay_rng": self.replay.rng.bit_generator.state,
            "replay": [t.to_dict() for t in self.replay.items],
            "history": self.history.to_dict(),
        }
        if self.env_config is not None:
            doc["env_config"] = self.env_config.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainingState":
        agent = Agent.from_dict(doc)
        prog = doc["progress"]
        rng = np.random.default_rng()
        rng.bit_generator.state = prog["rng"]
        rrng = np.random.default_rng()
        rrng.bit_generator.state = prog["replay_rng"]
        replay = ReplayBuffer(agent.config.replay_capacity, rrng)
        for t in prog["replay"]:
            replay.push(Transition.from_dict(t))
        env_cfg = EnvConfig.from_dict(doc["env_config"]) if "env_config" in doc else None
        return cls(agent, replay, rng, TrainingHistory.from_dict(prog["history"]),
                   int(prog["episode"]), int(prog["global_step"]), env_cfg)


def save_checkpoint(state: TrainingState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state.to_dict()))


def load_checkpoint(path: str | Path) -> TrainingState:
    return TrainingState.from_dict(json.loads(Path(path).read_text()))


class TrainingError(VoltsiteError):
    pass


def new_training_state(config: TrainConfig, env_config: EnvConfig | None = None) -> TrainingState:
    return TrainingState(
        Agent(config),
        ReplayBuffer(config.replay_capacity, np.random.default_rng([config.seed, STREAM_REPLAY])),
        np.random.default_rng([config.seed, STREAM_ACTIONS]),
        TrainingHistory(),
        env_config=env_config,
    )


def episode_seed(seed: int, episode: int) -> int:
    return int(np.random.default_rng([seed, STREAM_RESET, episode]).integers(2**31))


def run_episodes(env: PlacementEnv, state: TrainingState, config: TrainConfig,
                 until_episode: int | None = None,
                 progress: Callable[[int, float], None] | None = None) -> TrainingState:
    """Advance training from ``state.episode`` up to ``until_episode`` (default: all)."""
    last = config.episodes if until_episode is None else min(until_episode, config.episodes)
    rho_max = env.scenario.rho_max
    agent = state.agent
    while state.episode < last:
        ep = state.episode
        try:
            world = env.reset(episode_seed(config.seed, ep))
            feats = normalize_all(world.states, rho_max)
            total = 0.0
            for k in range(config.steps_per_episode):
                eps = config.epsilon(state.global_step)
                loc = select_location(agent.q_loc, feats, eps, state.rng)
                port = select_port(agent.q_port, feats[loc], eps, state.rng)
                res = env.step(Action(loc, port))
                next_feats = normalize_all(res.states, rho_max)
                terminal = k == config.steps_per_episode - 1
                reward = res.reward.total
                state.replay.push(Transition(feats[loc].copy(), res.chosen, port, reward, next_feats, terminal))
                losses = train_step(agent, state.replay, config.batch, config)
                loss_loc, loss_port = losses if losses is not None else (None, None)
                state.history.rows.append((state.global_step, ep, loss_loc, loss_port, eps, reward))
                total += reward
                state.global_step += 1
                feats = next_feats
        except VoltsiteError as exc:
            raise TrainingError(f"episode {ep}, step {k}: {exc}") from exc
        state.history.episode_rewards.append(total)
        state.episode += 1
        if progress is not None:
            progress(ep, total)
    return state


def greedy_rollout(agent: Agent, env: PlacementEnv, steps: int, seed: int = 0,
                   method: str = "dqn") -> tuple[PlacementPlan, list[RewardBreakdown]]:
    world = env.reset(seed)
    rho_max = env.scenario.rho_max
    planned, rewards = [], []
    for _ in range(steps):
        feats = normalize_all(world.states, rho_max)
        scores = agent.q_loc.forward(feats, cache=False)[:, 0]
        loc = int(np.argmax(scores))
        port = int(np.argmax(agent.q_port.forward(feats[loc], cache=False))) + 1
        res = env.step(Action(loc, port))
        planned.append(PlannedStation(res.chosen, port, env.config.ports_per_station))
        rewards.append(res.reward)
        world = env.world
    return PlacementPlan(planned, method, seed), rewards


def train(scenario: Scenario, env_config: EnvConfig = EnvConfig(), config: TrainConfig = TrainConfig(),
          resume: TrainingState | None = None, plan_steps: int | None = None,
          progress: Callable[[int, float], None] | None = None,
          ) -> tuple[Agent, TrainingHistory, PlacementPlan]:
    env = PlacementEnv(scenario, env_config)
    state = resume if resume is not None else new_training_state(config, env_config)
    run_episodes(env, state, config, progress=progress)
    steps = config.steps_per_episode if plan_steps is None else plan_steps
    plan, _ = greedy_rollout(state.agent, env, steps, episode_seed(config.seed, 0))
    return state.agent, state.history, plan


def best_deterministic_candidate(env: PlacementEnv) -> int:
    """Exhaustive scan of the current candidates' deterministic rewards."""
    w = env.world
    vals = [deterministic_reward(s, env.scenario.rho_max, env.config.weights) for s in w.states]
    return int(np.argmax(vals))
