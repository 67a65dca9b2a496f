"""Bayesian belief maintenance over discrete states.

The observation model is a discretized Gaussian over grid cells, truncated to
the grid and renormalized. On a rectangular grid the truncated 2-D kernel
factorizes into two 1-D truncated kernels, which keeps likelihood vectors and
sampling O(S) without materializing an S x S matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ImpossibleObservationError
from .model import StructuredTransition

__all__ = [
    "Belief",
    "ObservationModel",
    "DenseObservationModel",
    "GridObservationModel",
    "observation_likelihood",
    "belief_update",
    "predictive_distribution",
]


@dataclass(frozen=True)
class Belief:
    """Probability vector over states; always normalized."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("belief must be a normalized probability vector")
        object.__setattr__(self, "probs", p)

    @staticmethod
    def point_mass(state: int, num_states: int) -> "Belief":
        p = np.zeros(num_states)
        p[state] = 1.0
        return Belief(p)

    @staticmethod
    def uniform(num_states: int) -> "Belief":
        return Belief(np.full(num_states, 1.0 / num_states))

    def entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-(p @ np.log(p)))

    def argmax(self) -> int:
        return int(np.argmax(self.probs))


class ObservationModel:
    """Interface: per-state distributions over observation indices."""

    num_states: int
    num_observations: int

    def likelihood(self, z: int, s: int) -> float:
        raise NotImplementedError

    def likelihood_vector(self, z: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, s: int, rng: np.random.Generator) -> int:
        raise NotImplementedError


class DenseObservationModel(ObservationModel):
    """Explicit (S, Z) kernel matrix; rows must sum to 1."""

    def __init__(self, kernel: np.ndarray):
        kernel = np.asarray(kernel, dtype=np.float64)
        if kernel.ndim != 2 or (kernel < 0).any():
            raise ValueError("kernel must be a non-negative matrix")
        if not np.allclose(kernel.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("kernel rows must sum to 1")
        self.kernel = kernel
        self.num_states, self.num_observations = kernel.shape

    def likelihood(self, z: int, s: int) -> float:
        return float(self.kernel[s, z])

    def likelihood_vector(self, z: int) -> np.ndarray:
        return self.kernel[:, z].copy()

    def sample(self, s: int, rng: np.random.Generator) -> int:
        return int(np.searchsorted(np.cumsum(self.kernel[s]), rng.random()))


class GridObservationModel(ObservationModel):
    """Discretized Gaussian position noise on a width x height grid.

    Observation indices coincide with cell indices. sigma = 0 degenerates to
    a noiseless point mass on the true cell.
    """

    def __init__(self, width: int, height: int, sigma: float):
        if sigma < 0:
            raise ValueError("sigma must be >= 0")
        self.width = width
        self.height = height
        self.sigma = sigma
        self.num_states = self.num_observations = width * height
        self._wx = self._axis_weights(width)
        self._wy = self._axis_weights(height)
        # cumulative per-center distributions for inverse-CDF sampling
        self._cdf_x = np.cumsum(self._wx / self._wx.sum(axis=1, keepdims=True), axis=1)
        self._cdf_y = np.cumsum(self._wy / self._wy.sum(axis=1, keepdims=True), axis=1)
        self._norm_x = self._wx.sum(axis=1)
        self._norm_y = self._wy.sum(axis=1)

    def _axis_weights(self, n: int) -> np.ndarray:
        """(n, n) matrix of unnormalized 1-D kernel weights w[center, pos]."""
        pos = np.arange(n)
        d = pos[None, :] - pos[:, None]
        if self.sigma == 0:
            return (d == 0).astype(np.float64)
        return np.exp(-(d.astype(np.float64) ** 2) / (2.0 * self.sigma**2))

    def _split(self, cell: int):
        return cell % self.width, cell // self.width

    def likelihood(self, z: int, s: int) -> float:
        if not (0 <= z < self.num_observations) or not (0 <= s < self.num_states):
            raise IndexError("observation/state index out of range")
        xs, ys = self._split(s)
        xz, yz = self._split(z)
        return float(
            self._wx[xs, xz] * self._wy[ys, yz] / (self._norm_x[xs] * self._norm_y[ys])
        )

    def likelihood_vector(self, z: int) -> np.ndarray:
        if not (0 <= z < self.num_observations):
            raise IndexError("observation index out of range")
        xz, yz = self._split(z)
        lx = self._wx[:, xz] / self._norm_x  # per state-column
        ly = self._wy[:, yz] / self._norm_y  # per state-row
        return np.outer(ly, lx).ravel()

    def sample(self, s: int, rng: np.random.Generator) -> int:
        xs, ys = self._split(s)
        x = int(np.searchsorted(self._cdf_x[xs], rng.random()))
        y = int(np.searchsorted(self._cdf_y[ys], rng.random()))
        return y * self.width + x


def observation_likelihood(model: ObservationModel, z: int, s: int) -> float:
    """Kernel entry: probability of observing z from true state s."""
    return model.likelihood(z, s)


def predictive_distribution(
    b: Belief, a: int, t_hat, p: float | None = None
) -> np.ndarray:
    """One-step predicted state distribution under the estimated transitions.

    t_hat is either a StructuredTransition (with p overriding its stored
    success probability) or a dense (A, S, S) array of rows.
    """
    if isinstance(t_hat, StructuredTransition):
        sp = t_hat.success_prob if p is None else p
        return kernels.belief_predict(
            b.probs, sp, t_hat.intended[a], t_hat.dev_idx[a], t_hat.dev_w[a]
        )
    rows = np.asarray(t_hat, dtype=np.float64)
    if rows.ndim != 3:
        raise ValueError("dense transitions must have shape (A, S, S)")
    return b.probs @ rows[a]


def belief_update(
    b: Belief,
    a: int,
    z: int,
    t_hat,
    model: ObservationModel,
    p: float | None = None,
) -> Belief:
    """Posterior belief after taking action a and observing z.

    b'(s') is proportional to obs_likelihood(z | s') * sum_s T(s' | s, a) b(s).
    Raises ImpossibleObservationError when the posterior has zero mass
    everywhere; callers fall back to the predictive distribution.
    """
    pred = predictive_distribution(b, a, t_hat, p)
    unnorm = pred * model.likelihood_vector(z)
    total = unnorm.sum()
    if total <= 0.0:
        raise ImpossibleObservationError(
            f"observation {z} has zero likelihood under the predicted belief"
        )
    return Belief(unnorm / total)
