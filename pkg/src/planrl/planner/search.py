"""Tree search: goal resampling, Pareto node selection, chained extensions.

The outer loop draws a goal and rescores the tree, the middle loop picks a
node with rank-biased sampling, and the inner loop extends a chain of up to
horizon nodes from it. Finding a new best node resets the selection exponent
to its greedy maximum and shrinks the horizon toward the depth where the
improvement happened; sustained failure anneals the exponent down (widening
exploration) and grows the horizon.
"""

from __future__ import annotations

import numpy as np

from ..sim_core import (EnvModel, SimulationDivergence, control_jacobian,
                        rollout_batch, sample_feasible_state)
from .actions import ActionCommand, sample_action, sample_method
from .params import PlannerParams
from .pareto import sample_rank
from .rewards import weighted_norm
from .tree import SearchTree


def sample_goal(task_goal: np.ndarray, goal_bias: float, env: EnvModel,
                rng: np.random.Generator) -> np.ndarray:
    """The task goal with probability goal_bias, else a feasible uniform draw."""
    if rng.random() <= goal_bias:
        return np.asarray(task_goal, dtype=float).copy()
    return sample_feasible_state(env, rng)


def select_node(tree: SearchTree, beta: float, rng: np.random.Generator) -> int:
    """Pick a node by total-reward rank; ties in reward go to older nodes."""
    n = len(tree)
    rank = sample_rank(n, beta, rng)
    order = np.argsort(-tree.r_total[:n], kind="stable")
    return int(order[rank - 1])


def update_search_params(beta: float, horizon: float, found_better: bool,
                         i_e: int, params: PlannerParams) -> tuple[float, float]:
    """Exponential-smoothing update of the selection exponent and horizon.

    Pure function of its inputs. i_e is the 1-based extension index at which
    the improvement occurred; it is unused on the no-improvement branch.
    """
    if found_better:
        return params.beta_max, 0.95 * horizon + 0.05 * (i_e + 1)
    beta2 = max(0.99 * beta, params.beta_min)
    horizon2 = min(0.95 * horizon + 0.05 * (horizon + 1), params.horizon_max)
    return beta2, horizon2


def extend(tree: SearchTree, node_idx: int, cmd: ActionCommand,
           env: EnvModel) -> int | None:
    """Roll the action out from a node and append the outcome as a child.

    The PD reference interpolates from the node's absolute command to the
    node's joint positions displaced by direction*magnitude, over
    step_multiple base steps. A divergent rollout discards the node and
    returns None.
    """
    s = tree.states[node_idx]
    prev_cmd = tree.abs_cmd[node_idx]
    rel = cmd.direction * cmd.magnitude
    target = s[env.sl_qr] + rel
    try:
        final, knots = rollout_batch(env, s[None, :], prev_cmd[None, :],
                                     target[None, :], cmd.step_multiple,
                                     want_knots=True)
        s_child = final[0]
        # linearize about a continuation of the same relative command
        jac, _, f0 = control_jacobian(env, s_child, s_child[env.sl_qr] + rel,
                                      prev_cmd=target)
    except SimulationDivergence:
        tree.extend_failures += 1
        return None
    return tree.add_node(s_child, node_idx, cmd.direction, cmd.magnitude,
                         cmd.step_multiple, target, jac, f0, knots[:, 0, :])


def recompute_rewards(tree: SearchTree, s_g: np.ndarray) -> None:
    tree.recompute_rewards(s_g)


def search_progress(tree: SearchTree, s_0: np.ndarray, s_g: np.ndarray) -> float:
    """Relative closing of the best node's goal distance, in [0, 1].

    1 - r_d(best)/r_d(s_0); a start already at the goal counts as 1.
    """
    w = tree.params.dist_weights
    r0 = -weighted_norm(np.asarray(s_0, dtype=float) - s_g, w)
    if r0 == 0.0:
        return 1.0
    r_best = float(np.max(-weighted_norm(tree.states[:tree.n] - s_g, w)))
    return float(1.0 - r_best / r0)


def best_trajectory(tree: SearchTree, s_g: np.ndarray):
    """Base-step trajectory from the root to the node closest to s_g.

    Closeness is pure goal distance, not total reward. Returns a list of
    (state, absolute command) pairs, one per base step, entry 0 being the
    root state with its own command. Multi-step actions are expanded into
    their per-base-step knots, regenerated exactly as the rollout
    interpolated them, so replaying the commands reproduces the states.
    """
    s_g = np.asarray(s_g, dtype=float)
    r_d = -weighted_norm(tree.states[:tree.n] - s_g, tree.params.dist_weights)
    node = int(np.argmax(r_d))
    path = []
    while node >= 0:
        path.append(node)
        node = int(tree.parent[node])
    path.reverse()
    out = [(tree.states[path[0]].copy(), tree.abs_cmd[path[0]].copy())]
    for i in path[1:]:
        prev = tree.abs_cmd[tree.parent[i]]
        new = tree.abs_cmd[i]
        k = int(tree.step_multiple[i])
        knots = tree.knot_states[i]
        for j in range(1, k + 1):
            c = new if j == k else prev + (new - prev) * (j / k)
            out.append((knots[j].copy(), c.copy()))
    return out


def plan(env: EnvModel, s_1: np.ndarray, task_goal: np.ndarray,
         params: PlannerParams, rng: np.random.Generator,
         max_nodes: int | None = None,
         stop_progress: float | None = None) -> SearchTree:
    """Grow a search tree from s_1.

    Runs n_goals * iters_per_goal selection rounds; each round chains up to
    the current horizon extensions from the selected node, continuing from
    the newest child (or staying put after a failure). max_nodes and
    stop_progress (measured against task_goal) end the search early.
    """
    params.validate()
    s_1 = np.asarray(s_1, dtype=float)
    task_goal = np.asarray(task_goal, dtype=float)
    tree = SearchTree(env, params)
    q_r = s_1[env.sl_qr].copy()
    jac, _, f0 = control_jacobian(env, s_1, q_r)
    zero = np.zeros(env.n_r)
    tree.add_node(s_1, -1, zero, zero, 1, q_r, jac, f0,
                  s_1[None, :].copy())
    beta = params.beta
    horizon = params.horizon
    done = False
    for _ in range(params.n_goals):
        goal = sample_goal(task_goal, params.goal_bias, env, rng)
        tree.recompute_rewards(goal)
        for _ in range(params.iters_per_goal):
            node = select_node(tree, beta, rng)
            n_ext = max(1, int(round(horizon)))
            found_better = False
            current = node
            for i_e in range(1, n_ext + 1):
                method = sample_method(params.action_probs, rng)
                cmd = sample_action(tree, current, method, env, params, rng)
                best_before = tree.r_total[tree.best_index]
                child = extend(tree, current, cmd, env)
                if child is None:
                    continue
                if tree.r_total[child] > best_before:
                    beta, horizon = update_search_params(beta, horizon, True,
                                                         i_e, params)
                    found_better = True
                current = child
                if max_nodes is not None and len(tree) >= max_nodes:
                    done = True
                    break
            if not found_better:
                beta, horizon = update_search_params(beta, horizon, False,
                                                     n_ext, params)
            if not done and stop_progress is not None \
                    and search_progress(tree, s_1, task_goal) >= stop_progress:
                done = True
            if done:
                break
        tree.progress_log.append((len(tree),
                                  search_progress(tree, s_1, task_goal)))
        if done:
            break
    return tree
