"""Core model types: the decision-process spec, ground-truth success-probability
schedules, and the structured transition model.

The environment's time variation is carried by a single success probability
p(t): an action reaches its intended successor with probability p(t) and
otherwise lands in a per-(state, action) deviation kernel. Schedules evaluate
on a continuous time axis so a run can sample them at any step resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ConfigError

__all__ = [
    "TvPomdpSpec",
    "Constant",
    "Linear",
    "Exponential",
    "Piecewise",
    "SigmoidGaussianSwitch",
    "schedule_eval",
    "schedule_from_config",
    "StructuredTransition",
    "transition_row",
    "validate_spec",
]


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


@dataclass(frozen=True)
class TvPomdpSpec:
    """Dimensions and scalar knobs of a time-varying decision process."""

    num_states: int
    num_actions: int
    num_observations: int
    discount: float
    delta_max: float
    horizon: int
    obs_sigma: float = 0.0


def validate_spec(spec: TvPomdpSpec) -> List[str]:
    """Return a list of violated invariants; empty means the spec is valid."""
    violations = []
    if spec.num_states < 1:
        violations.append("num_states must be >= 1")
    if spec.num_actions < 1:
        violations.append("num_actions must be >= 1")
    if spec.num_observations < 1:
        violations.append("num_observations must be >= 1")
    if not (0.0 < spec.discount <= 1.0):
        violations.append("discount out of range (0, 1]")
    if not (0.0 <= spec.delta_max <= 1.0):
        violations.append("delta_max out of range [0, 1]")
    if spec.horizon < 1:
        violations.append("horizon must be >= 1")
    if spec.obs_sigma < 0.0:
        violations.append("obs_sigma must be >= 0")
    return violations


# ---------------------------------------------------------------------------
# Ground-truth schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    p: float

    def value(self, t: float) -> float:
        return _clamp01(self.p)


@dataclass(frozen=True)
class Linear:
    p0: float
    slope: float

    def value(self, t: float) -> float:
        return _clamp01(self.p0 + self.slope * t)


@dataclass(frozen=True)
class Exponential:
    p0: float
    rate: float

    def value(self, t: float) -> float:
        return _clamp01(self.p0 * math.exp(-self.rate * t))


@dataclass(frozen=True)
class SigmoidGaussianSwitch:
    """Logistic ramp-up that switches to a Gaussian decay bump at switch_time.

    Before the switch the value is 1 / (1 + exp(-(t - switch_time/2))); from
    the switch onward it is exp(-(t - switch_time)^2 / 2).
    """

    switch_time: float = 10.0

    def value(self, t: float) -> float:
        if t <= self.switch_time:
            return _clamp01(1.0 / (1.0 + math.exp(-(t - self.switch_time / 2.0))))
        return _clamp01(math.exp(-((t - self.switch_time) ** 2) / 2.0))


@dataclass(frozen=True)
class Piecewise:
    """Contiguous segments of (start, end, schedule); holds the final value
    past the last segment."""

    segments: Tuple[Tuple[float, float, "Schedule"], ...]

    def __post_init__(self):
        if not self.segments:
            raise ConfigError("piecewise schedule needs at least one segment")
        prev_end = None
        for start, end, _ in self.segments:
            if end <= start:
                raise ConfigError("piecewise segment must have end > start")
            if prev_end is not None and not math.isclose(start, prev_end):
                raise ConfigError("piecewise segments must be contiguous")
            prev_end = end

    def value(self, t: float) -> float:
        for start, end, sub in self.segments:
            if t < end:
                return sub.value(t)
        last_start, last_end, last = self.segments[-1]
        return last.value(last_end)


Schedule = Constant | Linear | Exponential | SigmoidGaussianSwitch | Piecewise


def schedule_eval(schedule: Schedule, t: float) -> float:
    """Ground-truth success probability at time t, always in [0, 1]."""
    if t < 0:
        raise ValueError(f"schedule time must be >= 0, got {t}")
    return schedule.value(t)


_SCHEDULE_KINDS = {
    "constant": lambda c: Constant(p=float(c["p"])),
    "linear": lambda c: Linear(p0=float(c["p0"]), slope=float(c["slope"])),
    "exponential": lambda c: Exponential(p0=float(c["p0"]), rate=float(c["rate"])),
    "sigmoid_gaussian_switch": lambda c: SigmoidGaussianSwitch(
        switch_time=float(c.get("switch_time", 10.0))
    ),
}


def schedule_from_config(cfg: Dict) -> Schedule:
    """Build a schedule from its JSON form, e.g. {"kind": "linear", "p0": 1, "slope": -0.05}."""
    try:
        kind = cfg["kind"]
    except (KeyError, TypeError):
        raise ConfigError(f"schedule config must be a mapping with a 'kind': {cfg!r}")
    if kind == "piecewise":
        segs = tuple(
            (float(s["start"]), float(s["end"]), schedule_from_config(s["schedule"]))
            for s in cfg["segments"]
        )
        return Piecewise(segments=segs)
    if kind not in _SCHEDULE_KINDS:
        raise ConfigError(f"unknown schedule kind {kind!r}")
    try:
        return _SCHEDULE_KINDS[kind](cfg)
    except KeyError as e:
        raise ConfigError(f"schedule {kind!r} missing field {e}")


# ---------------------------------------------------------------------------
# Structured transitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StructuredTransition:
    """Success/deviate transition structure shared by every time step.

    intended[a, s] is the successor reached with probability p; dev_idx/dev_w
    give, per (a, s), the deviation outcomes drawn with probability 1 - p.
    Each deviation row sums to 1 and excludes the intended successor whenever
    an alternative exists.
    """

    num_states: int
    num_actions: int
    intended: np.ndarray  # (A, S) int32
    dev_idx: np.ndarray  # (A, S, D) int32
    dev_w: np.ndarray  # (A, S, D) float64
    success_prob: float = 1.0

    def __post_init__(self):
        a, s = self.intended.shape
        if (a, s) != (self.num_actions, self.num_states):
            raise ValueError("intended successor table has wrong shape")
        if self.dev_idx.shape != self.dev_w.shape or self.dev_idx.shape[:2] != (a, s):
            raise ValueError("deviation kernel tables have wrong shape")
        sums = self.dev_w.sum(axis=2)
        if not np.allclose(sums, 1.0, atol=1e-9):
            raise ValueError("deviation kernel rows must sum to 1")
        if not (0.0 <= self.success_prob <= 1.0):
            raise ValueError("success_prob must be in [0, 1]")


def transition_row(
    st: StructuredTransition, s: int, a: int, p: float | None = None
) -> np.ndarray:
    """Materialize the full distribution over successors for (s, a).

    p overrides the structure's stored success probability, which lets one
    structure serve every time step of a schedule.
    """
    if not (0 <= s < st.num_states) or not (0 <= a < st.num_actions):
        raise IndexError(f"state/action ({s}, {a}) out of range")
    if p is None:
        p = st.success_prob
    row = np.zeros(st.num_states)
    np.add.at(row, st.dev_idx[a, s], (1.0 - p) * st.dev_w[a, s])
    row[st.intended[a, s]] += p
    return row
