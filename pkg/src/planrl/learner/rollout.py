"""Episode collection and policy evaluation."""

from __future__ import annotations

import numpy as np

from ..nets import normalizer_update
from ..planner import plan
from ..sim_core import EnvModel, SimulationDivergence, rollout_batch
from .agent import Agent, policy_action
from .config import TrainConfig
from .data import (DemoSet, ReplayBuffer, Transition, demo_trajectory,
                   her_relabel, sparse_reward)


def sample_rl_goal(env: EnvModel, rng: np.random.Generator,
                   goal_bias: float) -> np.ndarray:
    """Goal state for one episode: the task goal with probability
    goal_bias, otherwise a random object placement at rest.

    Robot components are copied from the task goal; they carry zero
    distance weight and only pass through as network input."""
    g = env.task_goal.copy()
    if rng.random() <= goal_bias:
        return g
    g[env.sl_qo] = rng.uniform(env.s_min[env.sl_qo], env.s_max[env.sl_qo])
    g[env.sl_qdo] = 0.0
    return g


def build_demo_set(env: EnvModel, params, n_trees: int,
                   rng: np.random.Generator, max_nodes=None,
                   stop_progress=None) -> DemoSet:
    """Plan one tree per goal location to seed demonstrations.

    The first tree targets the task goal, the rest target random object
    placements so retargeted demonstrations cover the episode goal
    distribution."""
    trees = []
    for i in range(n_trees):
        s_g = env.task_goal.copy() if i == 0 else sample_rl_goal(env, rng,
                                                                 0.0)
        trees.append(plan(env, env.start_state, s_g, params, rng,
                          max_nodes=max_nodes, stop_progress=stop_progress))
    return DemoSet(trees)


def env_step(env: EnvModel, s: np.ndarray, prev_cmd: np.ndarray,
             a: np.ndarray, alpha_max) -> tuple:
    """One base-step transition under a policy action in [-1, 1].

    Returns (next state, absolute command tracked during the step)."""
    target = s[env.sl_qr] + a * alpha_max
    s_next = rollout_batch(env, s[None, :], prev_cmd[None, :],
                           target[None, :], 1)[0]
    return s_next, target


def run_episode(env: EnvModel, agent: Agent, s_0: np.ndarray,
                s_g: np.ndarray, cfg: TrainConfig, explore: bool,
                rng: np.random.Generator) -> list:
    """Roll the policy for n_steps; returns the transition list."""
    s = np.asarray(s_0, dtype=float).copy()
    prev_cmd = s[env.sl_qr].copy()
    out = []
    for _ in range(cfg.n_steps):
        a = policy_action(agent, s, s_g, explore, cfg.eta, cfg.noise_sigma,
                          rng, dual=cfg.dual_policy)
        s_next, prev_cmd = env_step(env, s, prev_cmd, a, cfg.alpha_max)
        r = sparse_reward(s_next, s_0, s_g, cfg.epsilon, cfg.dist_weights)
        out.append(Transition(s=s, a=a, s_g=np.asarray(s_g, dtype=float),
                              r=r, s_next=s_next))
        s = s_next
    return out


def collect_cycle(env: EnvModel, agent: Agent, demo_set,
                  buffer: ReplayBuffer, cfg: TrainConfig, epoch: int,
                  success_rate: float, rng: np.random.Generator) -> dict:
    """One cycle's worth of episodes appended to the buffer.

    Each of the n_rollouts slots becomes a demonstration with a probability
    set by demo_mode, otherwise an exploratory on-policy episode (retried
    once if the simulation diverges). Returns collection statistics.
    """
    stats = {"episodes": 0, "demo_episodes": 0, "env_steps": 0,
             "reward_sum": 0.0}
    for _ in range(cfg.n_rollouts):
        p_demo = 0.0
        if demo_set is not None and cfg.demo_mode != "none":
            if cfg.demo_mode == "fixed_ratio":
                p_demo = cfg.demo_ratio
            elif cfg.demo_mode == "decaying":
                p_demo = cfg.demo_ratio * (1.0 - success_rate)
            elif cfg.demo_mode == "initial_only":
                p_demo = cfg.demo_ratio if epoch == 1 else 0.0
        if rng.random() < p_demo:
            s_g = sample_rl_goal(env, rng, cfg.goal_bias)
            episode = demo_trajectory(demo_set, s_g, cfg.n_steps, rng, env,
                                      cfg.epsilon, cfg.dist_weights,
                                      cfg.alpha_max)
            buffer.store_episode(episode, is_demo=True)
            stats["demo_episodes"] += 1
        else:
            s_g = sample_rl_goal(env, rng, cfg.goal_bias)
            episode = None
            for attempt in range(2):
                try:
                    episode = run_episode(env, agent, env.start_state, s_g,
                                          cfg, True, rng)
                    break
                except SimulationDivergence:
                    if attempt == 1:
                        raise
            buffer.store_episode(episode, is_demo=False)
        stats["episodes"] += 1
        stats["env_steps"] += cfg.n_steps
        stats["reward_sum"] += float(sum(tr.r for tr in episode))
        normalizer_update(agent.norm,
                          np.vstack([[tr.s for tr in episode],
                                     [episode[0].s_g]]))
        if cfg.her_prob > 0.0:
            extra = her_relabel(episode, cfg.her_prob, rng, cfg.epsilon,
                                cfg.dist_weights)
            if extra:
                buffer.store_episode(extra, is_demo=episode[0].is_demo)
                stats["episodes"] += 1
    return stats


def evaluate(env: EnvModel, agent: Agent, cfg: TrainConfig,
             rng: np.random.Generator) -> float:
    """Deterministic rollouts from fresh goals; the success rate is the
    fraction that hit reward 0 at any step."""
    hits = 0
    for _ in range(cfg.eval_runs):
        s_g = sample_rl_goal(env, rng, cfg.goal_bias)
        episode = run_episode(env, agent, env.start_state, s_g, cfg, False,
                              rng)
        if any(tr.r == 0.0 for tr in episode):
            hits += 1
    return hits / cfg.eval_runs
