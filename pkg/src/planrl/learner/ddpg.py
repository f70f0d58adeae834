"""Off-policy training loop: minibatch updates, pre-training, epochs.

The critic regresses clipped one-step bootstrapped targets; the actor
ascends the critic through the action input. Target networks blend after
each cycle's block of updates.
"""

from __future__ import annotations

import time

import numpy as np

from ..nets import (adam_init, adam_step, backward, clone_mlp, forward,
                    forward_cache, init_mlp, normalizer_update, polyak_blend)
from ..sim_core import EnvModel
from .agent import Agent, actor_input, critic_input, make_agent
from .config import TrainConfig
from .data import DemoSet, ReplayBuffer, demo_trajectory
from .rollout import collect_cycle, evaluate, sample_rl_goal


def ddpg_update(buffer: ReplayBuffer, agent: Agent, cfg: TrainConfig,
                rng: np.random.Generator) -> tuple:
    """One minibatch step for critic and actor.

    Returns (critic loss, actor objective). Value targets are clipped to
    [-1/(1-gamma), 0], the tightest bound compatible with the {-1, 0}
    rewards.
    """
    batch = buffer.sample(cfg.n_batch, rng)
    s, a, s_g, r, s2 = (batch["s"], batch["a"], batch["s_g"], batch["r"],
                        batch["s_next"])
    n = cfg.n_batch

    x2 = actor_input(agent, s2, s_g)
    a2 = forward(agent.target_actor, x2)
    q2 = forward(agent.target_critic, critic_input(agent, s2, s_g, a2))[:, 0]
    v = r + cfg.gamma * q2
    np.clip(v, -1.0 / (1.0 - cfg.gamma), 0.0, out=v)

    q_pred, acts_q = forward_cache(agent.critic, critic_input(agent, s, s_g, a))
    err = q_pred[:, 0] - v
    critic_loss = float(err @ err) / n
    d_w, d_b, _ = backward(agent.critic, acts_q, (2.0 / n) * err[:, None])
    adam_step(agent.critic, d_w, d_b, agent.critic_opt)

    xa = actor_input(agent, s, s_g)
    a_pi, acts_a = forward_cache(agent.actor, xa)
    q_pi, acts_c = forward_cache(agent.critic, critic_input(agent, s, s_g, a_pi))
    actor_objective = float(q_pi.mean()
                            - cfg.action_l2 * float((a_pi ** 2).mean()))
    _, _, dx = backward(agent.critic, acts_c, np.full((n, 1), 1.0 / n))
    d_action = dx[:, -agent.actor.sizes[-1]:]
    # magnitude penalty keeps the squashed output off the saturated rails,
    # where the policy gradient dies
    d_penalty = (2.0 * cfg.action_l2 / a_pi.size) * a_pi
    d_w, d_b, _ = backward(agent.actor, acts_a, d_penalty - d_action)
    adam_step(agent.actor, d_w, d_b, agent.actor_opt)

    if not (np.isfinite(critic_loss) and np.isfinite(actor_objective)):
        raise RuntimeError(
            f"non-finite update: critic loss {critic_loss}, actor objective "
            f"{actor_objective}")
    return critic_loss, actor_objective


def _monte_carlo_values(rewards, gamma: float) -> np.ndarray:
    v = np.empty(len(rewards))
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        v[t] = acc
    return v


def pretrain(env: EnvModel, demo_set: DemoSet, agent: Agent,
             cfg: TrainConfig, rng: np.random.Generator,
             n_demos: int = 50) -> Agent:
    """Imitation pre-training from goal-reaching demonstrations.

    Regresses a separate policy on demo actions and, when enabled, the
    shared critic on discounted Monte-Carlo values. Demonstrations that
    never reach their goal are discarded.
    """
    if not (cfg.pretrain_policy or cfg.pretrain_value):
        return agent
    ss, aa, gg, vv = [], [], [], []
    for _ in range(n_demos):
        s_g = sample_rl_goal(env, rng, cfg.goal_bias)
        episode = demo_trajectory(demo_set, s_g, cfg.n_steps, rng, env,
                                  cfg.epsilon, cfg.dist_weights,
                                  cfg.alpha_max)
        rewards = [tr.r for tr in episode]
        if not any(r == 0.0 for r in rewards):
            continue
        values = _monte_carlo_values(rewards, cfg.gamma)
        for tr, v in zip(episode, values):
            ss.append(tr.s)
            aa.append(tr.a)
            gg.append(tr.s_g)
            vv.append(v)
    if not ss:
        raise ValueError("pre-training found no goal-reaching demonstrations")
    ss, aa = np.asarray(ss), np.asarray(aa)
    gg, vv = np.asarray(gg), np.asarray(vv)
    normalizer_update(agent.norm, np.vstack([ss, gg]))

    if cfg.pretrain_policy:
        agent.imitation_actor = init_mlp(agent.actor.sizes, "tanh", rng,
                                         final_scale=cfg.policy_final_scale)
        il_opt = adam_init(agent.imitation_actor, cfg.lr)
    value_opt = adam_init(agent.critic, cfg.lr) if cfg.pretrain_value else None

    n = len(ss)
    for _ in range(cfg.pretrain_updates):
        idx = rng.integers(n, size=min(cfg.n_batch, n))
        if cfg.pretrain_policy:
            x = actor_input(agent, ss[idx], gg[idx])
            out, acts = forward_cache(agent.imitation_actor, x)
            err = out - aa[idx]
            d_w, d_b, _ = backward(agent.imitation_actor, acts,
                                   (2.0 / len(idx)) * err)
            adam_step(agent.imitation_actor, d_w, d_b, il_opt)
        if cfg.pretrain_value:
            xq = critic_input(agent, ss[idx], gg[idx], aa[idx])
            out, acts = forward_cache(agent.critic, xq)
            err = out[:, 0] - vv[idx]
            d_w, d_b, _ = backward(agent.critic, acts,
                                   (2.0 / len(idx)) * err[:, None])
            adam_step(agent.critic, d_w, d_b, value_opt)
    if cfg.pretrain_value:
        agent.target_critic = clone_mlp(agent.critic)
    return agent


def train(env: EnvModel, demo_set, cfg: TrainConfig, seed: int,
          max_env_steps=None, wall_clock_cap=None, early_stop: bool = True):
    """Full training run; returns (agent, per-epoch metrics list).

    Optional budgets end training at an epoch boundary: a cap on
    cumulative environment steps or on elapsed seconds. early_stop=False
    keeps training through all epochs even at success rate 1.0, which
    sweeps need for comparable fixed-horizon averages.
    """
    cfg.validate()
    seq = np.random.SeedSequence(seed)
    net_seed, run_seed = seq.spawn(2)
    agent = make_agent(env, cfg, net_seed)
    rng = np.random.default_rng(run_seed)
    buffer = ReplayBuffer(cfg.buffer_episodes, cfg.n_steps, env.n_s, env.n_r)
    if (cfg.pretrain_policy or cfg.pretrain_value) and demo_set is not None:
        pretrain(env, demo_set, agent, cfg, rng)
    metrics = []
    env_steps = 0
    success_rate = 0.0
    t_start = time.time()
    for epoch in range(1, cfg.n_epochs + 1):
        losses = []
        reward_sum = 0.0
        episode_count = 0
        for cycle in range(1, cfg.n_cycles + 1):
            try:
                stats = collect_cycle(env, agent, demo_set, buffer, cfg,
                                      epoch, success_rate, rng)
                env_steps += stats["env_steps"]
                reward_sum += stats["reward_sum"]
                episode_count += stats["episodes"]
                if buffer.n_transitions >= cfg.n_batch:
                    for _ in range(cfg.n_episode):
                        losses.append(ddpg_update(buffer, agent, cfg, rng))
                polyak_blend(agent.target_actor, agent.actor, cfg.tau)
                polyak_blend(agent.target_critic, agent.critic, cfg.tau)
            except RuntimeError as exc:
                raise RuntimeError(
                    f"epoch {epoch} cycle {cycle}: {exc}") from exc
        success_rate = evaluate(env, agent, cfg, rng)
        mean_losses = (np.mean([l[0] for l in losses]) if losses else np.nan,
                       np.mean([l[1] for l in losses]) if losses else np.nan)
        metrics.append({
            "epoch": epoch,
            "env_steps": env_steps,
            "success_rate": success_rate,
            "mean_episode_reward": reward_sum / max(episode_count, 1),
            "demo_fraction": buffer.demo_fraction(),
            "critic_loss": float(mean_losses[0]),
            "actor_objective": float(mean_losses[1]),
        })
        if early_stop and success_rate == 1.0:
            break
        if max_env_steps is not None and env_steps >= max_env_steps:
            break
        if wall_clock_cap is not None and time.time() - t_start \
                >= wall_clock_cap:
            break
    return agent, metrics
