# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels; contracts match _kernels_py."""

import numpy as np

cimport cython

BACKEND = "compiled"


def value_iteration(intended, dev_idx, dev_w, p_seq, rewards, double gamma):
    intended = np.ascontiguousarray(intended, dtype=np.int32)
    dev_idx = np.ascontiguousarray(dev_idx, dtype=np.int32)
    dev_w = np.ascontiguousarray(dev_w, dtype=np.float64)
    p_seq = np.ascontiguousarray(p_seq, dtype=np.float64)
    rewards = np.ascontiguousarray(rewards, dtype=np.float64)

    cdef int n_actions = intended.shape[0]
    cdef int n_states = intended.shape[1]
    cdef int n_dev = dev_idx.shape[2]
    cdef int horizon = p_seq.shape[0]
    cdef int time_varying_r = 1 if rewards.shape[0] > 1 else 0

    values_arr = np.zeros((horizon + 1, n_states), dtype=np.float64)
    policy_arr = np.zeros((horizon, n_states), dtype=np.int32)

    cdef int[:, ::1] t_int = intended
    cdef int[:, :, ::1] t_dev = dev_idx
    cdef double[:, :, ::1] w_dev = dev_w
    cdef double[::1] ps = p_seq
    cdef double[:, :, ::1] rew = rewards
    cdef double[:, ::1] values = values_arr
    cdef int[:, ::1] policy = policy_arr

    cdef int tau, s, a, d, ri, best_a
    cdef double p, ev, q, best_q

    for tau in range(horizon - 1, -1, -1):
        p = ps[tau]
        ri = tau if time_varying_r else 0
        for s in range(n_states):
            best_q = -1e300
            best_a = 0
            for a in range(n_actions):
                ev = p * values[tau + 1, t_int[a, s]]
                for d in range(n_dev):
                    ev = ev + (1.0 - p) * w_dev[a, s, d] * values[tau + 1, t_dev[a, s, d]]
                q = rew[ri, s, a] + gamma * ev
                if q > best_q:
                    best_q = q
                    best_a = a
            values[tau, s] = best_q
            policy[tau, s] = best_a
    return values_arr, policy_arr


def belief_predict(belief, double p, intended_a, dev_idx_a, dev_w_a):
    belief = np.ascontiguousarray(belief, dtype=np.float64)
    intended_a = np.ascontiguousarray(intended_a, dtype=np.int32)
    dev_idx_a = np.ascontiguousarray(dev_idx_a, dtype=np.int32)
    dev_w_a = np.ascontiguousarray(dev_w_a, dtype=np.float64)

    cdef int n_states = belief.shape[0]
    cdef int n_dev = dev_idx_a.shape[1]
    pred_arr = np.zeros(n_states, dtype=np.float64)

    cdef double[::1] b = belief
    cdef int[::1] t_int = intended_a
    cdef int[:, ::1] t_dev = dev_idx_a
    cdef double[:, ::1] w_dev = dev_w_a
    cdef double[::1] pred = pred_arr

    cdef int s, d
    cdef double mass
    for s in range(n_states):
        mass = b[s]
        if mass == 0.0:
            continue
        pred[t_int[s]] += p * mass
        for d in range(n_dev):
            pred[t_dev[s, d]] += (1.0 - p) * mass * w_dev[s, d]
    return pred_arr
