"""Grid-world environments with schedule-driven slip and noisy observations.

Two reward schemes mirror the benchmark settings: ordered waypoint capture
(bonus per waypoint, larger bonus on the final goal) and corridor navigation
(cell costs with a one-time objective bonus). Actions are the eight compass
headings; a successful step enters the intended neighbor, a slip enters a
deviation cell (by default one of the two 45-degree-rotated headings).
Off-grid moves truncate to the boundary.

Grids can be described in plain text, one row per line: '#' unsafe, '.' safe,
'W' waypoint (reading order), 'G' goal, 'S' start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .belief import GridObservationModel
from .errors import ConfigError
from .model import Schedule, StructuredTransition, schedule_eval

__all__ = [
    "HEADINGS",
    "NUM_ACTIONS",
    "GridWorld",
    "EnvState",
    "StepOutcome",
    "env_reset",
    "env_step",
    "observe",
    "waypoint_reward",
    "corridor_reward",
    "build_transition_structure",
    "parse_map",
    "grid_from_map",
]

# eight headings, counterclockwise from east; index +-1 rotates 45 degrees
HEADINGS: Tuple[Tuple[int, int], ...] = (
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
)
NUM_ACTIONS = len(HEADINGS)

WAYPOINT_BONUS = 10.0
GOAL_BONUS = 50.0
SAFE_COST = -1.0
UNSAFE_COST = -10.0
OBJECTIVE_BONUS = 5.0


@dataclass(frozen=True)
class GridWorld:
    """Static description of a benchmark world.

    waypoints are ordered cell indices; the last one doubles as the goal.
    reward_kind selects the scheme: "waypoint" or "corridor".
    """

    width: int
    height: int
    start: int
    waypoints: Tuple[int, ...]
    schedule: Schedule
    safe_mask: np.ndarray  # (S,) bool
    capture_radius: float = 1.0
    obs_sigma: float = 0.0
    dt: float = 1.0
    reward_kind: str = "waypoint"
    deviation: str = "lateral"

    def __post_init__(self):
        n = self.width * self.height
        cells = (self.start,) + self.waypoints
        if not self.waypoints:
            raise ConfigError("world needs at least one waypoint (the goal)")
        if any(not (0 <= c < n) for c in cells):
            raise ConfigError("start/waypoint cells must lie inside the grid")
        if self.capture_radius < 0:
            raise ConfigError("capture_radius must be >= 0")
        if self.reward_kind not in ("waypoint", "corridor"):
            raise ConfigError(f"unknown reward_kind {self.reward_kind!r}")
        if self.deviation not in ("lateral", "uniform"):
            raise ConfigError(f"unknown deviation kernel {self.deviation!r}")
        if self.safe_mask.shape != (n,):
            raise ConfigError("safe_mask must have one entry per cell")

    @property
    def num_states(self) -> int:
        return self.width * self.height

    @property
    def goal(self) -> int:
        return self.waypoints[-1]

    def cell_xy(self, cell: int) -> Tuple[int, int]:
        return cell % self.width, cell // self.width

    def xy_cell(self, x: int, y: int) -> int:
        return y * self.width + x

    def observation_model(self) -> GridObservationModel:
        return GridObservationModel(self.width, self.height, self.obs_sigma)


@dataclass(frozen=True)
class EnvState:
    cell: int
    t: int
    next_waypoint_index: int


@dataclass(frozen=True)
class StepOutcome:
    next: EnvState
    reward: float
    observation: int
    success: bool


def _clamp_move(env: GridWorld, cell: int, heading: int) -> int:
    x, y = env.cell_xy(cell)
    dx, dy = HEADINGS[heading]
    nx = min(max(x + dx, 0), env.width - 1)
    ny = min(max(y + dy, 0), env.height - 1)
    return env.xy_cell(nx, ny)


def _deviation_targets(env: GridWorld, cell: int, heading: int) -> List[int]:
    """Slip destinations for (cell, heading), excluding the intended cell
    whenever an alternative exists."""
    intended = _clamp_move(env, cell, heading)
    if env.deviation == "lateral":
        rots = ((heading + 1) % NUM_ACTIONS, (heading - 1) % NUM_ACTIONS)
    else:
        rots = tuple(a for a in range(NUM_ACTIONS) if a != heading)
    targets = [_clamp_move(env, cell, r) for r in rots]
    alternatives = [c for c in targets if c != intended]
    return alternatives if alternatives else [intended]


def env_reset(env: GridWorld, seed: int = 0) -> EnvState:
    """Initial state: configured start cell at time zero."""
    return EnvState(cell=env.start, t=0, next_waypoint_index=0)


def waypoint_reward(s: EnvState, env: GridWorld) -> Tuple[float, int]:
    """Bonus for standing within capture radius of the next waypoint in order.

    The final waypoint is the goal and pays the goal bonus. At most one
    waypoint advances per call.
    """
    idx = s.next_waypoint_index
    if idx >= len(env.waypoints):
        return 0.0, idx
    wx, wy = env.cell_xy(env.waypoints[idx])
    x, y = env.cell_xy(s.cell)
    if math.hypot(x - wx, y - wy) <= env.capture_radius:
        bonus = GOAL_BONUS if idx == len(env.waypoints) - 1 else WAYPOINT_BONUS
        return bonus, idx + 1
    return 0.0, idx


def corridor_reward(cell: int, env: GridWorld) -> float:
    """Cell cost: safe corridor -1, unsafe -10, objective bonus at the goal."""
    if not (0 <= cell < env.num_states):
        raise IndexError(f"cell {cell} out of range")
    if cell == env.goal:
        return OBJECTIVE_BONUS
    return SAFE_COST if env.safe_mask[cell] else UNSAFE_COST


def observe(s: EnvState, env: GridWorld, rng: np.random.Generator) -> int:
    """Noisy position observation of the current cell."""
    return env.observation_model().sample(s.cell, rng)


def env_step(
    env: GridWorld,
    s: EnvState,
    a: int,
    rng: np.random.Generator,
    obs_rng: Optional[np.random.Generator] = None,
    obs_model: Optional[GridObservationModel] = None,
) -> StepOutcome:
    """Advance one step: slip draw, reward, observation.

    The slip stream consumes exactly two uniforms per step regardless of the
    outcome, so trajectories stay aligned across agents that share a seed.
    success reports whether the intended cell was entered, which at a wall can
    hold even when the slip draw fired.
    """
    if not (0 <= a < NUM_ACTIONS):
        raise IndexError(f"action {a} out of range")
    if obs_rng is None:
        obs_rng = rng
    if obs_model is None:
        obs_model = env.observation_model()

    p = schedule_eval(env.schedule, s.t * env.dt)
    u_slip = rng.random()
    u_dev = rng.random()
    intended = _clamp_move(env, s.cell, a)
    if u_slip < p:
        landing = intended
    else:
        targets = _deviation_targets(env, s.cell, a)
        landing = targets[min(int(u_dev * len(targets)), len(targets) - 1)]

    moved = EnvState(cell=landing, t=s.t + 1, next_waypoint_index=s.next_waypoint_index)
    if env.reward_kind == "waypoint":
        reward, new_idx = waypoint_reward(moved, env)
        moved = replace(moved, next_waypoint_index=new_idx)
    else:
        mission_open = s.next_waypoint_index == 0
        reward = corridor_reward(landing, env)
        if not mission_open and landing == env.goal:
            reward = SAFE_COST if env.safe_mask[landing] else UNSAFE_COST
        if mission_open and landing == env.goal:
            moved = replace(moved, next_waypoint_index=1)

    z = obs_model.sample(landing, obs_rng)
    return StepOutcome(
        next=moved, reward=reward, observation=z, success=landing == intended
    )


def build_transition_structure(env: GridWorld, p: float = 1.0) -> StructuredTransition:
    """Materialize intended/deviation tables for the agent-side model."""
    n, acts = env.num_states, NUM_ACTIONS
    n_dev = 2 if env.deviation == "lateral" else NUM_ACTIONS - 1
    intended = np.empty((acts, n), dtype=np.int32)
    dev_idx = np.empty((acts, n, n_dev), dtype=np.int32)
    dev_w = np.zeros((acts, n, n_dev))
    for a in range(acts):
        for cell in range(n):
            intended[a, cell] = _clamp_move(env, cell, a)
            targets = _deviation_targets(env, cell, a)
            k = len(targets)
            dev_idx[a, cell, :k] = targets
            dev_idx[a, cell, k:] = targets[0]
            dev_w[a, cell, :k] = 1.0 / k
    return StructuredTransition(
        num_states=n,
        num_actions=acts,
        intended=intended,
        dev_idx=dev_idx,
        dev_w=dev_w,
        success_prob=p,
    )


# ---------------------------------------------------------------------------
# Plain-text maps
# ---------------------------------------------------------------------------

_MAP_CHARS = {"#", ".", "W", "G", "S"}


def parse_map(text: str) -> dict:
    """Parse a plain-text grid description.

    Returns width, height, safe_mask, start, waypoints (reading order, goal
    appended last) and goal, as a dict matching GridWorld fields.
    """
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ConfigError("map is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ConfigError("map rows must all have the same length")
    height = len(rows)
    safe = np.zeros(width * height, dtype=bool)
    start = None
    goal = None
    waypoints: List[int] = []
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch not in _MAP_CHARS:
                raise ConfigError(f"unknown map character {ch!r} at ({x}, {y})")
            cell = y * width + x
            if ch != "#":
                safe[cell] = True
            if ch == "S":
                if start is not None:
                    raise ConfigError("map has more than one start cell")
                start = cell
            elif ch == "G":
                if goal is not None:
                    raise ConfigError("map has more than one goal cell")
                goal = cell
            elif ch == "W":
                waypoints.append(cell)
    if start is None or goal is None:
        raise ConfigError("map needs exactly one 'S' and one 'G'")
    return {
        "width": width,
        "height": height,
        "safe_mask": safe,
        "start": start,
        "waypoints": tuple(waypoints) + (goal,),
        "goal": goal,
    }


def grid_from_map(
    text: str,
    schedule: Schedule,
    dt: float = 1.0,
    obs_sigma: float = 0.0,
    reward_kind: str = "corridor",
    capture_radius: float = 1.0,
    deviation: str = "lateral",
) -> GridWorld:
    info = parse_map(text)
    return GridWorld(
        width=info["width"],
        height=info["height"],
        start=info["start"],
        waypoints=info["waypoints"],
        schedule=schedule,
        safe_mask=info["safe_mask"],
        capture_radius=capture_radius,
        obs_sigma=obs_sigma,
        dt=dt,
        reward_kind=reward_kind,
        deviation=deviation,
    )
