"""Node reward components: goal distance, proximity, reachability.

All three are nonpositive; a node at the goal, touching the object, with an
easily movable object scores 0. Functions accept both single nodes and
batches (leading axis).
"""

from __future__ import annotations

import numpy as np


def weighted_norm(x: np.ndarray, w_diag: np.ndarray) -> np.ndarray:
    """sqrt(x^T W x) with diagonal W, over the last axis."""
    return np.sqrt(np.sum(w_diag * x * x, axis=-1))


def distance_reward(s, s_g, dist_weights) -> np.ndarray:
    return -weighted_norm(np.asarray(s) - s_g, dist_weights)


def proximity_reward(d, prox_weights) -> np.ndarray:
    return -weighted_norm(np.asarray(d), prox_weights)


def reachability(b_obj: np.ndarray, delta_obj: np.ndarray, reg: float):
    """Ease of moving the object toward the goal: the squared goal error
    under the metric (B_o B_o^T + reg*I)^{-1}.

    b_obj: (..., n_o, n_r) object-configuration control Jacobian;
    delta_obj: (..., n_o) object configuration error. Solved as a symmetric
    positive definite system, never via an explicit inverse.
    """
    b_obj = np.asarray(b_obj)
    delta_obj = np.asarray(delta_obj)
    n_o = b_obj.shape[-2]
    m = b_obj @ np.swapaxes(b_obj, -1, -2)
    m[..., np.arange(n_o), np.arange(n_o)] += reg
    x = np.linalg.solve(m, delta_obj[..., None])[..., 0]
    out = np.einsum("...i,...i->...", delta_obj, x)
    return np.maximum(out, 0.0) if out.ndim else max(float(out), 0.0)


def reach_reward(m, scale: float, floor: float) -> np.ndarray:
    """-scale * log(m / floor), exactly zero once m is at or below floor."""
    m = np.asarray(m, dtype=float)
    return -scale * np.log(np.maximum(m, floor) / floor)


def node_rewards(s, s_g, d, m, params):
    """Reward components of one node given its sensor readings and
    reachability value. Returns (r_d, r_p, r_m, total)."""
    r_d = distance_reward(s, s_g, params.dist_weights)
    r_p = proximity_reward(d, params.prox_weights)
    r_m = reach_reward(m, params.reach_scale, params.reach_floor)
    return r_d, r_p, r_m, r_d + r_p + r_m
