"""The four action families used to grow the tree.

An action is a unit direction in joint space, an elementwise magnitude, and
an integer duration multiple of the base step. Directions come from one of
four samplers: uniform random, continuation of the node's incoming direction,
descent on the proximity sensors, or a regularized one-step pull toward the
current goal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sim_core import EnvModel, proximity_jacobian
from .params import ACTION_METHODS, PlannerParams


@dataclass
class ActionCommand:
    direction: np.ndarray       # unit vector, (n_r,)
    magnitude: np.ndarray       # (n_r,), elementwise in [0, alpha_max]
    step_multiple: int          # duration in base steps


def sample_method(action_probs: np.ndarray, rng: np.random.Generator) -> str:
    """Draw one of ACTION_METHODS according to the (unnormalized) weights."""
    c = np.cumsum(action_probs)
    return ACTION_METHODS[int(np.searchsorted(c, rng.random() * c[-1],
                                              side="right"))]


def _random_direction(n_r: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(n_r)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


def goal_directed_delta(B: np.ndarray, Q: np.ndarray, R: float,
                        f0_star: np.ndarray, a0_star: np.ndarray,
                        s_g: np.ndarray) -> np.ndarray:
    """Minimizer of the one-step quadratic pull toward s_g.

    Objective: ||f0* + B da - s_g||^2_Q + ||a0* + da||^2_R with diagonal Q
    (weight vector) and scalar R, giving
    da = -(B^T Q B + R I)^{-1} (B^T Q (f0* - s_g) + R a0*).
    The system matrix must be SPD; the Cholesky factorization doubles as the
    check.
    """
    h = B.T @ (Q[:, None] * B)
    h[np.diag_indices_from(h)] += R
    rhs = B.T @ (Q * (f0_star - s_g)) + R * a0_star
    try:
        low = np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError(
            "goal-directed system matrix is not positive definite; "
            "check state weights and action regularizer")
    y = np.linalg.solve(low, -rhs)
    return np.linalg.solve(low.T, y)


def sample_action(tree, node_idx: int, method: str, env: EnvModel,
                  params: PlannerParams, rng: np.random.Generator) -> ActionCommand:
    n_r = env.n_r
    k = int(rng.integers(1, params.step_multiple_max + 1))
    magnitude = rng.uniform(0.0, params.alpha_max)

    if method == "continuation":
        d = tree.a_dir[node_idx]
        n = np.linalg.norm(d)
        # the root has no incoming direction
        direction = d / n if n > 1e-12 else _random_direction(n_r, rng)
    elif method == "proximity":
        jac = proximity_jacobian(env, tree.states[node_idx])
        g = jac.T @ tree.prox[node_idx]
        n = np.linalg.norm(g)
        # zero gradient: sensors already at a flat minimum
        direction = -g / n if n > 1e-12 else _random_direction(n_r, rng)
    elif method == "goal_directed":
        a0_star = tree.a_dir[node_idx] * tree.a_mag[node_idx]
        da = goal_directed_delta(tree.jac[node_idx], params.gd_state_weights,
                                 params.gd_action_reg,
                                 tree.nominal_next[node_idx],
                                 a0_star, tree.current_goal)
        v = a0_star + da
        n = np.linalg.norm(v)
        direction = v / n if n > 1e-12 else _random_direction(n_r, rng)
        magnitude = params.alpha_max.copy()
    elif method == "random":
        direction = _random_direction(n_r, rng)
    else:
        raise ValueError(f"unknown action method {method!r}")
    return ActionCommand(direction=direction, magnitude=magnitude,
                         step_multiple=k)
