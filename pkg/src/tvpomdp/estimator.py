"""Weighted maximum-likelihood estimation of transition parameters under a
bounded per-step rate of change.

The weighted log-likelihood sum(w_i * log theta_{outcome_i}) reduces to
weighted outcome counts, so the estimate is the maximizer of
sum_k c_k log theta_k over the probability simplex intersected with the box
|theta_k - theta_prev_k| <= delta_max. That problem is separable and concave;
the solver is water-filling: theta_k = clip(c_k / lam, lo_k, hi_k) with lam
found by bisection so the coordinates sum to one. A grid-search oracle covers
the same problem for testing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DistributionError,
    EmptySampleError,
    EmptyWindowError,
    OracleScopeError,
    WeightError,
)
from .memory import MemoryWindow, PriorityConfig, weigh_all

__all__ = [
    "TransitionEstimate",
    "WeightedCounts",
    "weighted_counts",
    "unconstrained_mle",
    "constrained_mle",
    "scalar_success_mle",
    "estimate_step",
    "brute_force_oracle",
    "weighted_log_likelihood",
]

_SUM_TOL = 1e-10  # bisection target on |sum(theta) - 1|


@dataclass(frozen=True)
class TransitionEstimate:
    """Estimated success probability at time t, plus the t-1 value that anchors
    the rate-of-change box. rows carries full categorical estimates when the
    estimator runs in categorical mode."""

    t: int
    p_hat: float
    prev_p_hat: float
    rows: Optional[np.ndarray] = None
    prev_rows: Optional[np.ndarray] = None


@dataclass(frozen=True)
class WeightedCounts:
    """Per-outcome accumulated sample weight."""

    counts: np.ndarray

    def __post_init__(self):
        if (self.counts < 0).any():
            raise WeightError("counts must be >= 0")

    @property
    def total(self) -> float:
        return float(self.counts.sum())


def weighted_counts(
    samples: Iterable[Tuple[int, float]], num_outcomes: int
) -> WeightedCounts:
    """Accumulate c_k = sum of weights of samples with outcome k."""
    c = np.zeros(num_outcomes)
    for outcome, w in samples:
        if w < 0:
            raise WeightError(f"negative weight {w}")
        if not (0 <= outcome < num_outcomes):
            raise IndexError(f"outcome {outcome} out of range")
        c[outcome] += w
    return WeightedCounts(c)


def unconstrained_mle(counts: WeightedCounts) -> np.ndarray:
    """theta_k = c_k / sum(c)."""
    total = counts.total
    if total <= 0:
        raise EmptySampleError("all counts are zero")
    return counts.counts / total


def _check_distribution(theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if (theta < -1e-12).any() or abs(theta.sum() - 1.0) > 1e-9:
        raise DistributionError(f"not a probability distribution: {theta}")
    return theta


def _box(theta_prev: np.ndarray, delta_max: float) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.maximum(0.0, theta_prev - delta_max)
    hi = np.minimum(1.0, theta_prev + delta_max)
    return lo, hi


def constrained_mle(
    counts: WeightedCounts, theta_prev: np.ndarray, delta_max: float
) -> np.ndarray:
    """Maximize sum c_k log theta_k over the simplex within +-delta_max of theta_prev.

    All-zero counts return theta_prev unchanged: the likelihood is flat, and
    moving without data would burn rate-of-change budget for nothing.
    """
    theta_prev = _check_distribution(theta_prev)
    if delta_max < 0:
        raise ValueError("delta_max must be >= 0")
    c = counts.counts
    if c.size != theta_prev.size:
        raise DistributionError("counts and theta_prev disagree on dimension")
    if counts.total <= 0:
        return theta_prev.copy()
    lo, hi = _box(theta_prev, delta_max)

    pos = c > 0
    # Zero-count coordinates carry no likelihood; pin them to their lower
    # bounds unless the positive coordinates cannot absorb the leftover mass.
    target = 1.0 - lo[~pos].sum()
    hi_pos_sum = hi[pos].sum()
    theta = lo.copy()
    if hi_pos_sum <= target:
        theta[pos] = hi[pos]
        slack = 1.0 - hi_pos_sum - lo[~pos].sum()
        headroom = hi[~pos] - lo[~pos]
        room_total = headroom.sum()
        if room_total > 0:
            theta[~pos] = lo[~pos] + slack * headroom / room_total
        return theta

    cp, lp, hp = c[pos], lo[pos], hi[pos]

    def coords(lam: float) -> np.ndarray:
        return np.clip(cp / lam, lp, hp)

    # sum(coords) is continuous and decreasing in lam; bracket then bisect.
    # hp > 0 here: a zero-width box at zero only happens with delta_max = 0,
    # which the equality branch above already handled.
    lam_lo = max(0.5 * float((cp / hp).min()), 1e-300)  # coords all at hi
    lam_hi = max(2.0 * lam_lo, 1.0)
    while coords(lam_hi).sum() > target and lam_hi < 1e290:
        lam_hi *= 4.0
    for _ in range(200):
        lam = 0.5 * (lam_lo + lam_hi)
        s = coords(lam).sum()
        if abs(s - target) <= _SUM_TOL:
            break
        if s > target:
            lam_lo = lam
        else:
            lam_hi = lam
    theta[pos] = coords(lam)
    # residual from bisection tolerance lands on an unsaturated coordinate
    resid = 1.0 - theta.sum()
    if resid != 0.0:
        free = pos & (theta > lo + 1e-15) & (theta < hi - 1e-15)
        if free.any():
            j = int(np.argmax(free))
            theta[j] = min(max(theta[j] + resid, lo[j]), hi[j])
    return theta


def scalar_success_mle(
    samples: Sequence[Tuple[float, float]], p_prev: float, delta_max: float
) -> float:
    """Two-outcome special case: weighted success mean clipped into the box.

    Zero total weight returns p_prev.
    """
    if not (0.0 <= p_prev <= 1.0):
        raise DistributionError(f"p_prev must be in [0, 1], got {p_prev}")
    total = 0.0
    hits = 0.0
    for x, w in samples:
        if w < 0:
            raise WeightError(f"negative weight {w}")
        total += w
        hits += w * x
    if total <= 0:
        return p_prev
    mean = hits / total
    lo = max(0.0, p_prev - delta_max)
    hi = min(1.0, p_prev + delta_max)
    return min(max(mean, lo), hi)


def estimate_step(
    window: MemoryWindow,
    prev: TransitionEstimate,
    now: int,
    cfg: PriorityConfig,
    delta_max: float,
    mode: str = "scalar",
) -> TransitionEstimate:
    """One estimation step: weigh the window, then solve the constrained MLE.

    An empty window carries the previous estimate forward. In categorical mode
    the success/deviate pair is solved as a 2-outcome water-filling problem;
    scalar mode uses the closed-form clip. Both produce the same p_hat.
    """
    if len(window) == 0:
        return TransitionEstimate(t=now, p_hat=prev.p_hat, prev_p_hat=prev.p_hat)
    weighted = weigh_all(window, now, cfg)
    samples = [(1.0 if rec.success else 0.0, w) for rec, w in weighted]
    if mode == "scalar":
        p_hat = scalar_success_mle(samples, prev.p_hat, delta_max)
        return TransitionEstimate(t=now, p_hat=p_hat, prev_p_hat=prev.p_hat)
    if mode == "categorical":
        counts = weighted_counts(
            [(1 if x > 0.5 else 0, w) for x, w in samples], num_outcomes=2
        )
        prev_rows = np.array([1.0 - prev.p_hat, prev.p_hat])
        theta = constrained_mle(counts, prev_rows, delta_max)
        return TransitionEstimate(
            t=now,
            p_hat=float(theta[1]),
            prev_p_hat=prev.p_hat,
            rows=theta,
            prev_rows=prev_rows,
        )
    raise ValueError(f"unknown estimator mode {mode!r}")


def weighted_log_likelihood(counts: WeightedCounts, theta: np.ndarray) -> float:
    """sum_k c_k log theta_k, with 0 * log 0 = 0."""
    c = counts.counts
    theta = np.asarray(theta, dtype=np.float64)
    mask = c > 0
    if (theta[mask] <= 0).any():
        return -np.inf
    return float(c[mask] @ np.log(theta[mask]))


def brute_force_oracle(
    counts: WeightedCounts,
    theta_prev: np.ndarray,
    delta_max: float,
    resolution: float = 1e-2,
) -> np.ndarray:
    """Exhaustive grid search over the box-restricted simplex.

    Test oracle only: dimension capped at 4 and resolution at 1e-2 to keep the
    grid enumerable.
    """
    k = counts.counts.size
    if k > 4:
        raise OracleScopeError("oracle supports dimension <= 4")
    if resolution > 1e-2 + 1e-15:
        raise OracleScopeError("oracle resolution must be <= 1e-2")
    theta_prev = _check_distribution(theta_prev)
    lo, hi = _box(theta_prev, delta_max)
    n = int(round(1.0 / resolution))

    # integer compositions of n into k parts, built as a flat grid per axis
    axes = [np.arange(n + 1)] * (k - 1)
    grids = np.meshgrid(*axes, indexing="ij") if k > 1 else []
    if k == 1:
        candidates = np.array([[1.0]])
    else:
        flat = np.stack([g.ravel() for g in grids], axis=1)
        rem = n - flat.sum(axis=1)
        keep = rem >= 0
        candidates = np.column_stack([flat[keep], rem[keep]]) / n
    inside = ((candidates >= lo - 1e-12) & (candidates <= hi + 1e-12)).all(axis=1)
    candidates = candidates[inside]
    if candidates.shape[0] == 0:
        raise OracleScopeError("no grid point inside the constraint box")
    c = counts.counts
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(candidates > 0, np.log(np.maximum(candidates, 1e-300)), -np.inf)
        ll = np.where(c > 0, logs * c, 0.0).sum(axis=1)
    return candidates[int(np.argmax(ll))]
