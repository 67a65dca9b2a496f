"""Bounded transition memory with informativeness-weighted records.

Each remembered transition gets a priority weight combining three signals:
serial correlation between the window's outcomes at the record's age
(autocorrelation score), freshness (recency score), and distance from the
window mean (deviation score). The weights feed the estimator as
log-likelihood exponents, so they only need to be meaningful relative to
each other.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Deque, List, Sequence, Tuple

import numpy as np

from .errors import DegenerateSeriesError, EmptyWindowError, OrderingError

__all__ = [
    "MemoryRecord",
    "MemoryWindow",
    "PriorityConfig",
    "autocorrelation",
    "autocorrelation_score",
    "recency_score",
    "deviation_score",
    "combined_weight",
    "weigh_all",
]


@dataclass(frozen=True)
class MemoryRecord:
    """One observed transition: at time t, taking `action` in `state` landed in
    `successor`; `success` says whether that was the intended cell."""

    t: int
    state: int
    action: int
    successor: int
    success: bool
    observation: int = -1


@dataclass(frozen=True)
class PriorityConfig:
    """Relative importance of the three priority signals.

    epsilon keeps the recency score finite at lag zero and sets how quickly
    freshness decays: after max-normalization the recency score of a record
    of age k is epsilon / (k + epsilon).
    """

    w_a: float = 0.4
    w_r: float = 0.4
    w_d: float = 0.2
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.w_a < 0 or self.w_r < 0 or self.w_d < 0:
            raise ValueError("priority weights must be >= 0")
        if self.w_a + self.w_r + self.w_d <= 0:
            raise ValueError("at least one priority weight must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")


class MemoryWindow:
    """Bounded, time-ordered buffer of MemoryRecord; oldest evicted first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._records: Deque[MemoryRecord] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    @property
    def records(self) -> Tuple[MemoryRecord, ...]:
        return tuple(self._records)

    def push(self, record: MemoryRecord) -> "MemoryWindow":
        if self._records and record.t < self._records[-1].t:
            raise OrderingError(
                f"record at t={record.t} is older than window tail t={self._records[-1].t}"
            )
        self._records.append(record)
        return self

    def success_series(self) -> np.ndarray:
        """Window outcomes as a float 0/1 series, oldest first."""
        return np.array([1.0 if r.success else 0.0 for r in self._records])

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self._records], dtype=np.int64)


def autocorrelation(series: Sequence[float], lag: int) -> float:
    """Sample autocorrelation of the series at the given lag.

    Centered cross-products at the lag, normalized by the full-series sum of
    squared deviations; lag 0 is exactly 1 for any non-constant series.
    """
    z = np.asarray(series, dtype=np.float64)
    n = z.size
    if n < 2:
        raise ValueError("series must have length >= 2")
    if not (0 <= lag < n):
        raise ValueError(f"lag must be in [0, {n}), got {lag}")
    d = z - z.mean()
    denom = float(d @ d)
    if denom <= 0.0:
        raise DegenerateSeriesError("series has zero variance")
    if lag == 0:
        return 1.0
    return float(d[lag:] @ d[: n - lag]) / denom


def _acf_all_lags(series: np.ndarray) -> np.ndarray | None:
    """Autocorrelation at every lag 0..n-1, or None for degenerate series."""
    n = series.size
    d = series - series.mean()
    denom = float(d @ d)
    if denom <= 0.0 or n < 2:
        return None
    c = np.correlate(d, d, mode="full")[n - 1 :]
    return c / denom


def autocorrelation_score(window: MemoryWindow, record: MemoryRecord, now: int) -> float:
    """Correlation between the window's outcomes now and at the record's age.

    Out-of-range lags and zero-variance windows score 0.
    """
    lag = now - record.t
    series = window.success_series()
    if lag < 0 or lag >= series.size or series.size < 2:
        return 0.0
    try:
        return autocorrelation(series, lag)
    except DegenerateSeriesError:
        return 0.0


def recency_score(record: MemoryRecord, now: int, epsilon: float) -> float:
    """Freshness of a record: 1 / (age + epsilon)."""
    if now < record.t:
        raise ValueError("now must be >= record time")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    return 1.0 / (now - record.t + epsilon)


def deviation_score(record: MemoryRecord, window: MemoryWindow) -> float:
    """How far the record's outcome sits from the window mean outcome."""
    if len(window) == 0:
        raise EmptyWindowError("deviation score needs a non-empty window")
    x = 1.0 if record.success else 0.0
    return abs(x - float(window.success_series().mean()))


def combined_weight(a_s: float, r_s: float, d_s: float, cfg: PriorityConfig) -> float:
    """Weighted sum of the three scores, clamped at zero.

    The autocorrelation score can be negative; a negative total would turn
    the likelihood exponent into a penalty for fitting the sample, so it
    clamps to 0 (the sample is simply ignored).
    """
    return max(0.0, cfg.w_a * a_s + cfg.w_r * r_s + cfg.w_d * d_s)


def weigh_all(
    window: MemoryWindow, now: int, cfg: PriorityConfig
) -> List[Tuple[MemoryRecord, float]]:
    """Priority weight for every record in the window.

    Recency scores are normalized by the window maximum before combination so
    they share the autocorrelation/deviation scores' O(1) scale; otherwise
    1/epsilon would drown the other signals.
    """
    records = window.records
    if not records:
        raise EmptyWindowError("cannot weigh an empty window")
    series = window.success_series()
    times = window.times()
    lags = now - times
    if (lags < 0).any():
        raise ValueError("now must be >= every record time in the window")

    rho = _acf_all_lags(series)
    n = series.size
    a_scores = np.zeros(n)
    if rho is not None:
        in_range = (lags >= 0) & (lags < n)
        a_scores[in_range] = rho[lags[in_range]]

    r_scores = 1.0 / (lags + cfg.epsilon)
    r_scores = r_scores / r_scores.max()

    d_scores = np.abs(series - series.mean())

    weights = np.maximum(
        0.0, cfg.w_a * a_scores + cfg.w_r * r_scores + cfg.w_d * d_scores
    )
    return list(zip(records, weights.tolist()))
