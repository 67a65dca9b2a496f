"""Receding-horizon planning on the estimated time-varying model.

Planning approximates the belief-space problem QMDP-style: a time-indexed
value table over states is computed by backward induction under the projected
transition estimates, and actions are chosen by belief-weighted one-step
lookahead into that table, breaking ties toward the lowest action index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .belief import Belief
from .estimator import TransitionEstimate
from .model import StructuredTransition

__all__ = [
    "TransitionProjection",
    "ValueTable",
    "project_transition_forward",
    "time_varying_value_iteration",
    "select_action",
    "as_reward_array",
]

_PROJECTION_MODES = ("hold", "linear_extrapolate")


@dataclass(frozen=True)
class TransitionProjection:
    """Projected success probabilities for the next H transitions."""

    mode: str
    p: np.ndarray  # (H,) float64

    def __post_init__(self):
        if self.mode not in _PROJECTION_MODES:
            raise ValueError(f"unknown projection mode {self.mode!r}")
        p = np.asarray(self.p, dtype=np.float64)
        if (p < 0).any() or (p > 1).any():
            raise ValueError("projected probabilities must lie in [0, 1]")
        object.__setattr__(self, "p", p)

    @property
    def horizon(self) -> int:
        return int(self.p.shape[0])


@dataclass(frozen=True)
class ValueTable:
    """values[tau, s] for tau in 0..H (terminal layer all zero); policy[tau, s]
    is the greedy action."""

    values: np.ndarray  # (H+1, S)
    policy: np.ndarray  # (H, S) int32


def project_transition_forward(
    est: TransitionEstimate,
    history: Sequence[float] | None,
    delta_max: float,
    mode: str = "hold",
    horizon: int = 1,
) -> TransitionProjection:
    """Extend the current estimate over the planning horizon.

    `hold` repeats the estimate. `linear_extrapolate` continues the slope of
    the last two estimates, clamped per step to +-delta_max and to [0, 1];
    `history` (oldest first) overrides the estimate's own previous value when
    it carries at least two points.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if mode == "hold":
        return TransitionProjection(mode, np.full(horizon, est.p_hat))
    if mode != "linear_extrapolate":
        raise ValueError(f"unknown projection mode {mode!r}")
    prev = est.prev_p_hat
    if history is not None and len(history) >= 2:
        prev = float(history[-2])
    slope = est.p_hat - prev
    slope = min(max(slope, -delta_max), delta_max)
    steps = est.p_hat + slope * np.arange(1, horizon + 1)
    return TransitionProjection(mode, np.clip(steps, 0.0, 1.0))


def as_reward_array(
    rewards, num_states: int, num_actions: int, horizon: int
) -> np.ndarray:
    """Normalize a reward spec to a (1 or H, S, A) float array.

    Accepts a (S, A) array (time-invariant), a (H, S, A) array, or a callable
    (state, action, offset) -> float, which is materialized.
    """
    if callable(rewards):
        out = np.empty((horizon, num_states, num_actions))
        for tau in range(horizon):
            for s in range(num_states):
                for a in range(num_actions):
                    out[tau, s, a] = rewards(s, a, tau)
        return out
    arr = np.ascontiguousarray(rewards, dtype=np.float64)
    if arr.shape == (num_states, num_actions):
        return arr[None, :, :]
    if arr.shape == (horizon, num_states, num_actions):
        return arr
    raise ValueError(f"rewards shape {arr.shape} fits neither (S, A) nor (H, S, A)")


def time_varying_value_iteration(
    structure: StructuredTransition,
    projection: TransitionProjection,
    rewards,
    discount: float,
) -> ValueTable:
    """Exact backward induction from the zero terminal layer."""
    horizon = projection.horizon
    r = as_reward_array(rewards, structure.num_states, structure.num_actions, horizon)
    values, policy = kernels.value_iteration(
        structure.intended,
        structure.dev_idx,
        structure.dev_w,
        projection.p,
        r,
        discount,
    )
    return ValueTable(values=values, policy=policy)


def select_action(
    b: Belief,
    vt: ValueTable,
    structure: StructuredTransition,
    projection: TransitionProjection,
    rewards,
    discount: float,
) -> int:
    """Belief-weighted one-step lookahead into the value table.

    Returns argmax_a sum_s b(s) [R(s, a) + discount * E_{s'}[V_1(s')]], with
    the expectation under the projection's first-step transition model.
    """
    r = as_reward_array(rewards, structure.num_states, structure.num_actions, 1)[0]
    v1 = vt.values[1] if vt.values.shape[0] > 1 else np.zeros(structure.num_states)
    p = float(projection.p[0])
    ev = p * v1[structure.intended] + (1.0 - p) * np.einsum(
        "asd,asd->as", structure.dev_w, v1[structure.dev_idx]
    )  # (A, S)
    q = b.probs @ (r + discount * ev.T)  # (A,)
    return int(np.argmax(q))
