"""Sampling-based tree planner over the simulator."""

from .actions import ActionCommand, goal_directed_delta, sample_action, sample_method
from .params import ACTION_METHODS, PlannerParams, default_params, dist_weight_vector
from .pareto import pareto_rank_pmf, sample_rank
from .rewards import (distance_reward, node_rewards, proximity_reward,
                      reach_reward, reachability, weighted_norm)
from .search import (best_trajectory, extend, plan, recompute_rewards,
                     sample_goal, search_progress, select_node,
                     update_search_params)
from .tree import SearchTree

__all__ = [
    "ACTION_METHODS", "ActionCommand", "PlannerParams", "SearchTree",
    "best_trajectory", "default_params", "dist_weight_vector",
    "distance_reward", "extend", "goal_directed_delta", "node_rewards",
    "pareto_rank_pmf", "plan", "proximity_reward", "reach_reward",
    "reachability", "recompute_rewards", "sample_action", "sample_goal",
    "sample_method", "sample_rank", "search_progress", "select_node",
    "update_search_params", "weighted_norm",
]
