"""Scenario configuration, episode execution, benchmarking, and result files.

A scenario is one JSON object (environment, schedule, agent, estimator and
planner knobs, seeds). Builtin presets mirror the benchmark regimes: a 40x40
waypoint world under constant and linearly decaying success probability, and
a 30x10 corridor world under constant, exponential-decay, and mid-run
switching slip.

Each run splits its root seed into independent environment and observation
streams, so the stochastic environment is identical across agents given the
same seed. Schedules run on a continuous time axis; a run samples its
schedule at t = step * dt, and presets pick dt so a whole run spans the
20-unit schedule window while per-step drift stays inside delta_max.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .baselines import (
    AGENT_KINDS,
    full_history_mle,
    most_recent_mle,
    time_augmented_vi_planner,
    unweighted_window_mle,
)
from .belief import Belief, GridObservationModel, belief_update, predictive_distribution
from .envsim import (
    GOAL_BONUS,
    HEADINGS,
    NUM_ACTIONS,
    OBJECTIVE_BONUS,
    SAFE_COST,
    UNSAFE_COST,
    WAYPOINT_BONUS,
    EnvState,
    GridWorld,
    build_transition_structure,
    env_reset,
    env_step,
    grid_from_map,
)
from .errors import ConfigError, ImpossibleObservationError
from .estimator import TransitionEstimate, estimate_step
from .memory import MemoryRecord, MemoryWindow, PriorityConfig
from .model import (
    Constant,
    Schedule,
    TvPomdpSpec,
    schedule_eval,
    schedule_from_config,
    validate_spec,
)
from .planner import (
    project_transition_forward,
    select_action,
    time_varying_value_iteration,
)

__all__ = [
    "ScenarioConfig",
    "RunResult",
    "BenchmarkResult",
    "PRESET_NAMES",
    "preset_config",
    "run_episode",
    "run_benchmark",
    "run_suite",
    "emit_results",
    "CSV_COLUMNS",
]

CSV_COLUMNS = (
    "scenario",
    "agent",
    "seed",
    "step",
    "t",
    "p_true",
    "p_hat",
    "action",
    "reward",
    "cum_reward",
    "mae_step",
)

_ESTIMATOR_MODES = ("scalar", "categorical")
_PROJECTION_MODES = ("hold", "linear_extrapolate")
_TA_VI_MODELS = ("initial", "true")


@dataclass
class ScenarioConfig:
    """Everything a benchmark run needs, JSON-round-trippable."""

    name: str
    env: Dict
    schedule: Dict
    num_steps: int
    dt: float = 1.0
    delta_max: float = 0.02
    agent: str = "mpse"
    estimator_mode: str = "scalar"
    w_a: float = 0.4
    w_r: float = 0.4
    w_d: float = 0.2
    epsilon: float = 1e-6
    window_size: int = 20
    horizon: int = 25
    discount: float = 0.95
    projection_mode: str = "hold"
    obs_sigma: float = 1.5
    p_init: float = 0.5
    capture_radius: float = 1.0
    deviation: str = "lateral"
    ta_vi_model: str = "initial"
    seeds: List[int] = field(default_factory=lambda: [0])

    def priority(self) -> PriorityConfig:
        return PriorityConfig(
            w_a=self.w_a, w_r=self.w_r, w_d=self.w_d, epsilon=self.epsilon
        )

    def build_schedule(self) -> Schedule:
        return schedule_from_config(self.schedule)

    def validate(self) -> List[str]:
        problems = []
        if self.agent not in AGENT_KINDS:
            problems.append(f"unknown agent {self.agent!r}")
        if self.estimator_mode not in _ESTIMATOR_MODES:
            problems.append(f"unknown estimator_mode {self.estimator_mode!r}")
        if self.projection_mode not in _PROJECTION_MODES:
            problems.append(f"unknown projection_mode {self.projection_mode!r}")
        if self.ta_vi_model not in _TA_VI_MODELS:
            problems.append(f"unknown ta_vi_model {self.ta_vi_model!r}")
        if self.num_steps < 1:
            problems.append("num_steps must be >= 1")
        if self.dt <= 0:
            problems.append("dt must be > 0")
        if not self.seeds:
            problems.append("seeds must be non-empty")
        if not (0.0 <= self.p_init <= 1.0):
            problems.append("p_init must be in [0, 1]")
        if self.window_size < 1:
            problems.append("window_size must be >= 1")
        if min(self.w_a, self.w_r, self.w_d) < 0 or self.w_a + self.w_r + self.w_d <= 0:
            problems.append("priority weights must be >= 0 and not all zero")
        if self.epsilon <= 0:
            problems.append("epsilon must be > 0")
        try:
            world = build_world(self)
        except ConfigError as e:
            problems.append(str(e))
            world = None
        try:
            self.build_schedule()
        except ConfigError as e:
            problems.append(str(e))
        if world is not None:
            spec = TvPomdpSpec(
                num_states=world.num_states,
                num_actions=NUM_ACTIONS,
                num_observations=world.num_states,
                discount=self.discount,
                delta_max=self.delta_max,
                horizon=self.horizon,
                obs_sigma=self.obs_sigma,
            )
            problems.extend(validate_spec(spec))
        return problems

    @staticmethod
    def from_dict(raw: Dict) -> "ScenarioConfig":
        raw = dict(raw)
        preset = raw.pop("preset", None)
        if preset is not None:
            base = preset_config(preset)
            merged = _config_to_dict(base)
            merged.update(raw)
            raw = merged
        seeds = raw.get("seeds", [0])
        if isinstance(seeds, int):
            raw["seeds"] = list(range(seeds))
        else:
            raw["seeds"] = [int(s) for s in seeds]
        known = {f for f in ScenarioConfig.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = {"name", "env", "schedule", "num_steps"} - set(raw)
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        return ScenarioConfig(**raw)


def _config_to_dict(cfg: ScenarioConfig) -> Dict:
    out = {}
    for name in ScenarioConfig.__dataclass_fields__:
        val = getattr(cfg, name)
        out[name] = list(val) if isinstance(val, tuple) else val
    return out


def build_world(cfg: ScenarioConfig) -> GridWorld:
    """Materialize the scenario's grid world."""
    env = cfg.env
    kind = env.get("kind")
    schedule = cfg.build_schedule()
    common = dict(
        schedule=schedule,
        dt=cfg.dt,
        obs_sigma=cfg.obs_sigma,
        capture_radius=cfg.capture_radius,
        deviation=cfg.deviation,
    )
    if kind == "map":
        text = env.get("text")
        if text is None:
            path = env.get("path")
            if path is None:
                raise ConfigError("map env needs 'text' or 'path'")
            with open(path) as fh:
                text = fh.read()
        return grid_from_map(
            text, reward_kind=env.get("reward_kind", "corridor"), **common
        )
    if kind == "waypoint_grid":
        try:
            width, height = int(env["width"]), int(env["height"])
            start = env["start"]
            waypoints = env["waypoints"]
        except KeyError as e:
            raise ConfigError(f"waypoint_grid env missing field {e}")
        if not waypoints:
            raise ConfigError("waypoint_grid needs at least one waypoint")
        to_cell = lambda xy: int(xy[1]) * width + int(xy[0])
        return GridWorld(
            width=width,
            height=height,
            start=to_cell(start),
            waypoints=tuple(to_cell(w) for w in waypoints),
            safe_mask=np.ones(width * height, dtype=bool),
            reward_kind="waypoint",
            **common,
        )
    raise ConfigError(f"unknown env kind {kind!r}")


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def _serpentine_waypoints() -> List[List[int]]:
    xs_fwd, xs_rev = [5, 20, 35], [35, 20, 5]
    pts = []
    for i, y in enumerate((4, 12, 20, 28, 36)):
        for x in xs_fwd if i % 2 == 0 else xs_rev:
            pts.append([x, y])
    return pts


def _corridor_map() -> str:
    """30x10 S-shaped corridor, three cells wide, start left, goal right."""
    width, height = 30, 10
    path = []
    path += [(x, 5) for x in range(1, 11)]
    path += [(10, y) for y in range(2, 6)]
    path += [(x, 2) for x in range(10, 21)]
    path += [(20, y) for y in range(2, 8)]
    path += [(x, 7) for x in range(20, 29)]
    safe = set()
    for x, y in path:
        for ddx in (-1, 0, 1):
            for ddy in (-1, 0, 1):
                nx, ny = x + ddx, y + ddy
                if 0 <= nx < width and 0 <= ny < height:
                    safe.add((nx, ny))
    rows = []
    for y in range(height):
        row = []
        for x in range(width):
            if (x, y) == (1, 5):
                row.append("S")
            elif (x, y) == (28, 7):
                row.append("G")
            else:
                row.append("." if (x, y) in safe else "#")
        rows.append("".join(row))
    return "\n".join(rows)


_WAYPOINT_ENV = {
    "kind": "waypoint_grid",
    "width": 40,
    "height": 40,
    "start": [2, 2],
    "waypoints": _serpentine_waypoints(),
}
_CORRIDOR_ENV = {"kind": "map", "text": _corridor_map(), "reward_kind": "corridor"}

# Priority defaults for benchmark scenarios. epsilon sets the recency decay
# half-life; 20 gives a gentle slope over the window instead of the sharp
# newest-sample spike a tiny epsilon produces.
_PRESET_PRIORITY = dict(w_a=0.4, w_r=0.4, w_d=0.2, epsilon=20.0, window_size=20)


def _waypoint_preset(name: str, schedule: Dict, delta_max: float) -> ScenarioConfig:
    # 300 steps span the 20-unit schedule window: dt = 1/15, so the fastest
    # preset drift (linear slope -1/20 per unit) moves 1/300 per step, well
    # inside delta_max = 0.02 per step.
    return ScenarioConfig(
        name=name,
        env=dict(_WAYPOINT_ENV),
        schedule=schedule,
        num_steps=300,
        dt=20.0 / 300.0,
        delta_max=delta_max,
        horizon=25,
        discount=0.95,
        obs_sigma=1.5,
        seeds=list(range(50)),
        **_PRESET_PRIORITY,
    )


def _corridor_preset(name: str, schedule: Dict, delta_max: float) -> ScenarioConfig:
    return ScenarioConfig(
        name=name,
        env=dict(_CORRIDOR_ENV),
        schedule=schedule,
        num_steps=200,
        dt=0.1,
        delta_max=delta_max,
        horizon=25,
        discount=0.95,
        obs_sigma=1.5,
        seeds=list(range(50)),
        **_PRESET_PRIORITY,
    )


def preset_config(name: str) -> ScenarioConfig:
    if name == "scenario1":
        return _waypoint_preset(name, {"kind": "constant", "p": 0.7}, 0.02)
    if name == "scenario2":
        return _waypoint_preset(name, {"kind": "linear", "p0": 1.0, "slope": -0.05}, 0.02)
    if name == "hw_constant":
        return _corridor_preset(name, {"kind": "constant", "p": 0.9}, 0.02)
    if name == "hw_exp":
        return _corridor_preset(
            name, {"kind": "exponential", "p0": 0.9, "rate": 0.05}, 0.02
        )
    if name in ("hw_switch", "scenario3"):
        cfg = _corridor_preset(
            name, {"kind": "sigmoid_gaussian_switch", "switch_time": 10.0}, 0.03
        )
        return cfg
    raise ConfigError(f"unknown preset {name!r}")


PRESET_NAMES = (
    "scenario1",
    "scenario2",
    "scenario3",
    "hw_constant",
    "hw_exp",
    "hw_switch",
)


# ---------------------------------------------------------------------------
# Episode execution
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    """Per-step trace and totals for one (scenario, agent, seed) run."""

    scenario: str
    agent: str
    seed: int
    t: np.ndarray  # schedule time per step
    p_true: np.ndarray
    p_hat: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    belief_entropy: np.ndarray
    mae: float
    cum_reward: float
    waypoints_followed: int
    fallback_count: int

    @property
    def num_steps(self) -> int:
        return int(self.t.shape[0])

    def rows(self):
        cum = 0.0
        for i in range(self.num_steps):
            cum += float(self.rewards[i])
            yield {
                "scenario": self.scenario,
                "agent": self.agent,
                "seed": self.seed,
                "step": i,
                "t": float(self.t[i]),
                "p_true": float(self.p_true[i]),
                "p_hat": float(self.p_hat[i]),
                "action": int(self.actions[i]),
                "reward": float(self.rewards[i]),
                "cum_reward": cum,
                "mae_step": abs(float(self.p_hat[i]) - float(self.p_true[i])),
            }


def _mission_rewards(
    world: GridWorld, wp_index: int, xy_cache: np.ndarray
) -> np.ndarray:
    """(S, A) planner reward field for the current mission phase."""
    n = world.num_states
    field_s = np.zeros(n)
    if world.reward_kind == "waypoint":
        if wp_index < len(world.waypoints):
            target = world.waypoints[wp_index]
            tx, ty = world.cell_xy(target)
            dist = np.hypot(xy_cache[:, 0] - tx, xy_cache[:, 1] - ty)
            bonus = (
                GOAL_BONUS if wp_index == len(world.waypoints) - 1 else WAYPOINT_BONUS
            )
            field_s[dist <= world.capture_radius] = bonus
    else:
        field_s = np.where(world.safe_mask, SAFE_COST, UNSAFE_COST).astype(np.float64)
        if wp_index == 0:
            field_s[world.goal] = OBJECTIVE_BONUS
    return np.ascontiguousarray(np.repeat(field_s[:, None], NUM_ACTIONS, axis=1))


class _TaViState:
    """Value table over (state, remaining time) plus its reference step."""

    def __init__(self, table, start_step: int):
        self.table = table
        self.start_step = start_step


def run_episode(cfg: ScenarioConfig, seed: int) -> RunResult:
    """Execute one seeded run of the configured agent.

    Loop per step: plan from the current belief and estimate, act, remember
    the transition, re-estimate, then update the belief with the fresh
    estimate and the new observation.
    """
    problems = cfg.validate()
    if problems:
        raise ConfigError("; ".join(problems))

    world = build_world(cfg)
    schedule = world.schedule
    structure = build_transition_structure(world)
    obs_model = world.observation_model()
    ss = np.random.SeedSequence(seed)
    env_ss, obs_ss = ss.spawn(2)
    env_rng = np.random.Generator(np.random.PCG64(env_ss))
    obs_rng = np.random.Generator(np.random.PCG64(obs_ss))

    n = world.num_states
    xy_cache = np.array([world.cell_xy(c) for c in range(n)], dtype=np.float64)

    state = env_reset(world, seed)
    belief = Belief.point_mass(world.start, n)
    window = MemoryWindow(cfg.window_size)
    priority = cfg.priority()
    est = TransitionEstimate(t=-1, p_hat=cfg.p_init, prev_p_hat=cfg.p_init)
    all_records: List[MemoryRecord] = []
    est_history: List[float] = [cfg.p_init]

    # the ta_vi agent plans against an assumed schedule instead of estimating
    assumed: Optional[Schedule] = None
    ta_state: Optional[_TaViState] = None
    if cfg.agent == "ta_vi":
        if cfg.ta_vi_model == "true":
            assumed = schedule
        else:
            assumed = Constant(schedule_eval(schedule, 0.0))

    def ta_replan(step: int, wp_index: int) -> _TaViState:
        horizon = max(1, cfg.num_steps - step)
        rewards = _mission_rewards(world, wp_index, xy_cache)
        table = time_augmented_vi_planner(
            assumed, structure, rewards, cfg.discount, horizon, dt=cfg.dt, t0=step
        )
        return _TaViState(table, step)

    steps = cfg.num_steps
    p_true_arr = np.empty(steps)
    p_hat_arr = np.empty(steps)
    t_arr = np.empty(steps)
    action_arr = np.empty(steps, dtype=np.int32)
    reward_arr = np.empty(steps)
    entropy_arr = np.empty(steps)
    fallbacks = 0
    wp_index = 0
    reward_cache: Dict[int, np.ndarray] = {}

    for step in range(steps):
        rewards = reward_cache.get(wp_index)
        if rewards is None:
            rewards = reward_cache[wp_index] = _mission_rewards(
                world, wp_index, xy_cache
            )
        if cfg.agent == "ta_vi":
            if ta_state is None:
                ta_state = ta_replan(step, wp_index)
            action = int(ta_state.table.policy[step - ta_state.start_step][belief.argmax()])
            p_model = schedule_eval(assumed, step * cfg.dt)
        else:
            projection = project_transition_forward(
                est, est_history, cfg.delta_max, cfg.projection_mode, cfg.horizon
            )
            table = time_varying_value_iteration(
                structure, projection, rewards, cfg.discount
            )
            action = select_action(
                belief, table, structure, projection, rewards, cfg.discount
            )
            p_model = est.p_hat

        outcome = env_step(world, state, action, env_rng, obs_rng, obs_model)
        record = MemoryRecord(
            t=step,
            state=state.cell,
            action=action,
            successor=outcome.next.cell,
            success=outcome.success,
            observation=outcome.observation,
        )
        window.push(record)
        all_records.append(record)

        if cfg.agent == "mpse":
            est = estimate_step(
                window, est, step, priority, cfg.delta_max, cfg.estimator_mode
            )
        elif cfg.agent == "dt_window":
            p = unweighted_window_mle(window, est.p_hat, cfg.delta_max)
            est = TransitionEstimate(t=step, p_hat=p, prev_p_hat=est.p_hat)
        elif cfg.agent == "full_history":
            p = full_history_mle(all_records, est.p_hat, cfg.delta_max)
            est = TransitionEstimate(t=step, p_hat=p, prev_p_hat=est.p_hat)
        elif cfg.agent == "most_recent":
            p = most_recent_mle(window, est.p_hat, cfg.delta_max)
            est = TransitionEstimate(t=step, p_hat=p, prev_p_hat=est.p_hat)
        elif cfg.agent == "ta_vi":
            p_next = schedule_eval(assumed, (step + 1) * cfg.dt)
            est = TransitionEstimate(t=step, p_hat=p_model, prev_p_hat=est.p_hat)
        est_history.append(est.p_hat)

        belief_p = est.p_hat if cfg.agent != "ta_vi" else p_model
        try:
            belief = belief_update(
                belief, action, outcome.observation, structure, obs_model, p=belief_p
            )
        except ImpossibleObservationError:
            fallbacks += 1
            pred = predictive_distribution(belief, action, structure, belief_p)
            belief = Belief(pred / pred.sum())

        t_sched = step * cfg.dt
        t_arr[step] = t_sched
        p_true_arr[step] = schedule_eval(schedule, t_sched)
        p_hat_arr[step] = est.p_hat
        action_arr[step] = action
        reward_arr[step] = outcome.reward
        entropy_arr[step] = belief.entropy()

        if outcome.next.next_waypoint_index != wp_index:
            wp_index = outcome.next.next_waypoint_index
            if cfg.agent == "ta_vi":
                ta_state = ta_replan(step + 1, wp_index)
        state = outcome.next

    mae = float(np.abs(p_hat_arr - p_true_arr).mean())
    return RunResult(
        scenario=cfg.name,
        agent=cfg.agent,
        seed=seed,
        t=t_arr,
        p_true=p_true_arr,
        p_hat=p_hat_arr,
        actions=action_arr,
        rewards=reward_arr,
        belief_entropy=entropy_arr,
        mae=mae,
        cum_reward=float(reward_arr.sum()),
        waypoints_followed=wp_index,
        fallback_count=fallbacks,
    )


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------


@dataclass
class BenchmarkResult:
    scenario: str
    agent: str
    runs: List[RunResult]
    aggregates: Dict[str, float]


def _aggregate(runs: Sequence[RunResult]) -> Dict[str, float]:
    maes = np.array([r.mae for r in runs])
    rewards = np.array([r.cum_reward for r in runs])
    waypoints = np.array([r.waypoints_followed for r in runs], dtype=np.float64)
    return {
        "mae_mean": float(maes.mean()),
        "mae_std": float(maes.std()),
        "cum_reward_mean": float(rewards.mean()),
        "cum_reward_std": float(rewards.std()),
        "waypoints_mean": float(waypoints.mean()),
        "waypoints_std": float(waypoints.std()),
        "fallback_total": int(sum(r.fallback_count for r in runs)),
        "num_runs": len(runs),
    }


def _thread_count() -> int:
    raw = os.environ.get("TVPOMDP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"TVPOMDP_THREADS must be an integer, got {raw!r}")


def run_benchmark(cfg: ScenarioConfig) -> BenchmarkResult:
    """Run every seed of one scenario configuration and aggregate."""
    problems = cfg.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(lambda s: run_episode(cfg, s), cfg.seeds))
    else:
        runs = [run_episode(cfg, s) for s in cfg.seeds]
    return BenchmarkResult(
        scenario=cfg.name, agent=cfg.agent, runs=runs, aggregates=_aggregate(runs)
    )


def run_suite(configs: Sequence[ScenarioConfig]) -> List[BenchmarkResult]:
    """Run a list of scenario configurations in order."""
    return [run_benchmark(cfg) for cfg in configs]


def load_config_file(path: str) -> List[ScenarioConfig]:
    """Read a JSON config: one scenario object or {"scenarios": [...]}."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {e}")
    if isinstance(raw, dict) and "scenarios" in raw:
        items = raw["scenarios"]
    elif isinstance(raw, dict):
        items = [raw]
    elif isinstance(raw, list):
        items = raw
    else:
        raise ConfigError("config must be an object or a list of objects")
    return [ScenarioConfig.from_dict(item) for item in items]


# ---------------------------------------------------------------------------
# Result emission
# ---------------------------------------------------------------------------


def emit_results(
    results: Sequence[RunResult], fmt: str = "csv", path: str = "results.csv"
) -> str:
    """Write per-step rows for every run to one file; returns the path.

    CSV columns (and JSON object fields) are exactly:
    scenario,agent,seed,step,t,p_true,p_hat,action,reward,cum_reward,mae_step
    """
    if not results:
        raise ValueError("no results to emit")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for result in results:
            for row in result.rows():
                writer.writerow(row)
        payload = buf.getvalue()
    elif fmt == "json":
        rows = [row for result in results for row in result.rows()]
        payload = json.dumps(rows, indent=None, separators=(",", ":")) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(payload)
    return path
