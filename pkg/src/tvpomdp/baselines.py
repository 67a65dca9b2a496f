"""Comparison estimators and a time-augmented value-iteration planner.

The estimator baselines share the rate-of-change clipping with the
prioritized estimator so differences come purely from how samples are
weighted: equal weights over the window, equal weights over the whole run, or
the latest sample alone. The planner baseline bakes an assumed schedule into
a time-layered value table instead of estimating online.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .estimator import scalar_success_mle
from .memory import MemoryRecord, MemoryWindow
from .model import Schedule, StructuredTransition, schedule_eval
from .planner import TransitionProjection, ValueTable, time_varying_value_iteration

__all__ = [
    "AGENT_KINDS",
    "unweighted_window_mle",
    "full_history_mle",
    "most_recent_mle",
    "time_augmented_vi_planner",
]

AGENT_KINDS = ("mpse", "dt_window", "full_history", "most_recent", "ta_vi")


def unweighted_window_mle(
    window: MemoryWindow, p_prev: float, delta_max: float
) -> float:
    """Window success mean with unit weights, clipped like the weighted solve."""
    samples = [(1.0 if r.success else 0.0, 1.0) for r in window]
    return scalar_success_mle(samples, p_prev, delta_max)


def full_history_mle(
    records: Sequence[MemoryRecord], p_prev: float, delta_max: float
) -> float:
    """Success mean over the entire run history (stationarity assumption)."""
    samples = [(1.0 if r.success else 0.0, 1.0) for r in records]
    return scalar_success_mle(samples, p_prev, delta_max)


def most_recent_mle(
    window: MemoryWindow, p_prev: float, delta_max: float
) -> float:
    """Latest sample alone; maximally adaptive, maximally noisy."""
    records = window.records
    if not records:
        return p_prev
    x = 1.0 if records[-1].success else 0.0
    return scalar_success_mle([(x, 1.0)], p_prev, delta_max)


def time_augmented_vi_planner(
    schedule: Schedule,
    structure: StructuredTransition,
    rewards,
    discount: float,
    horizon: int,
    dt: float = 1.0,
    t0: int = 0,
) -> ValueTable:
    """Value iteration over the (state, time) product space.

    The schedule is whatever the planner assumes, evaluated at absolute times
    (t0 + k) * dt for k in 0..horizon-1; a constant schedule collapses every
    time layer to the same policy.
    """
    p_seq = np.array(
        [schedule_eval(schedule, (t0 + k) * dt) for k in range(horizon)]
    )
    projection = TransitionProjection(mode="hold", p=p_seq)
    return time_varying_value_iteration(structure, projection, rewards, discount)
