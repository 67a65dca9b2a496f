"""NumPy implementations of the hot kernels.

Same contracts as the compiled extension (_kernels_c); the public selector in
`kernels` picks whichever is available. Shapes: S states, A actions, D
deviation outcomes per (action, state), H planning steps.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def value_iteration(
    intended: np.ndarray,  # (A, S) int32
    dev_idx: np.ndarray,  # (A, S, D) int32
    dev_w: np.ndarray,  # (A, S, D) float64
    p_seq: np.ndarray,  # (H,) float64
    rewards: np.ndarray,  # (1 or H, S, A) float64
    gamma: float,
):
    """Backward induction over H steps with per-step success probability.

    Values at step H are zero. Returns (values (H+1, S), policy (H, S)); the
    greedy policy breaks ties toward the lowest action index.
    """
    n_actions, n_states = intended.shape
    horizon = p_seq.shape[0]
    values = np.zeros((horizon + 1, n_states))
    policy = np.zeros((horizon, n_states), dtype=np.int32)
    for tau in range(horizon - 1, -1, -1):
        v_next = values[tau + 1]
        ev_intended = v_next[intended]  # (A, S)
        ev_dev = np.einsum("asd,asd->as", dev_w, v_next[dev_idx])
        p = p_seq[tau]
        r = rewards[tau if rewards.shape[0] > 1 else 0]  # (S, A)
        q = r.T + gamma * (p * ev_intended + (1.0 - p) * ev_dev)  # (A, S)
        policy[tau] = np.argmax(q, axis=0)
        values[tau] = np.take_along_axis(q, policy[tau][None, :], axis=0)[0]
    return values, policy


def belief_predict(
    belief: np.ndarray,  # (S,)
    p: float,
    intended_a: np.ndarray,  # (S,) int32
    dev_idx_a: np.ndarray,  # (S, D) int32
    dev_w_a: np.ndarray,  # (S, D) float64
) -> np.ndarray:
    """Predictive state distribution after one action under success prob p."""
    n_states = belief.shape[0]
    pred = np.bincount(intended_a, weights=p * belief, minlength=n_states)
    slip = (1.0 - p) * belief
    for j in range(dev_idx_a.shape[1]):
        pred += np.bincount(
            dev_idx_a[:, j], weights=slip * dev_w_a[:, j], minlength=n_states
        )
    return pred
