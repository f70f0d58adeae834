"""Actor/critic bundle, action selection, dual-policy arbitration.

Both nets consume the state and the goal; states and goals share one input
normalizer. Policy outputs live in [-1, 1] per joint and are scaled by the
task's action magnitude bound when applied to the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..nets import (AdamState, Mlp, Normalizer, adam_init, clone_mlp,
                    forward, init_mlp, normalize)
from ..sim_core import EnvModel
from .config import TrainConfig


@dataclass
class Agent:
    actor: Mlp
    critic: Mlp
    target_actor: Mlp
    target_critic: Mlp
    actor_opt: AdamState
    critic_opt: AdamState
    norm: Normalizer                 # shared by states and goals
    imitation_actor: Mlp = None      # optional pre-trained policy
    dual_counts: dict = field(default_factory=lambda: {"rl": 0, "il": 0})


def make_agent(env: EnvModel, cfg: TrainConfig, seed) -> Agent:
    rng = np.random.default_rng(seed)
    n_s, n_r = env.n_s, env.n_r
    hidden = [cfg.hidden_width] * cfg.hidden_layers
    actor = init_mlp([2 * n_s] + hidden + [n_r], "tanh", rng,
                     final_scale=cfg.policy_final_scale)
    critic = init_mlp([2 * n_s + n_r] + hidden + [1], "identity", rng)
    return Agent(actor=actor, critic=critic,
                 target_actor=clone_mlp(actor),
                 target_critic=clone_mlp(critic),
                 actor_opt=adam_init(actor, cfg.lr),
                 critic_opt=adam_init(critic, cfg.lr),
                 norm=Normalizer(dim=n_s))


def actor_input(agent: Agent, s: np.ndarray, s_g: np.ndarray) -> np.ndarray:
    return np.concatenate([normalize(agent.norm, s),
                           normalize(agent.norm, s_g)], axis=-1)


def critic_input(agent: Agent, s, s_g, a) -> np.ndarray:
    return np.concatenate([normalize(agent.norm, s),
                           normalize(agent.norm, s_g), a], axis=-1)


def policy_action(agent: Agent, s: np.ndarray, s_g: np.ndarray,
                  explore: bool, eta: float, sigma: float,
                  rng: np.random.Generator, dual: bool = False) -> np.ndarray:
    """Action in [-1, 1]: deterministic when not exploring, otherwise
    uniform with probability eta, else the policy plus Gaussian noise."""
    n_r = agent.actor.sizes[-1]
    if explore and rng.random() < eta:
        return rng.uniform(-1.0, 1.0, size=n_r)
    if dual and agent.imitation_actor is not None:
        a = dual_policy_select(agent, s, s_g)
    else:
        a = forward(agent.actor, actor_input(agent, s, s_g))
    if explore:
        a = a + rng.normal(0.0, sigma, size=n_r)
    return np.clip(a, -1.0, 1.0)


def dual_policy_select(agent: Agent, s: np.ndarray, s_g: np.ndarray) -> np.ndarray:
    """Arbitrate between the online and the pre-trained policy with the
    critic; ties keep the online action."""
    x = actor_input(agent, s, s_g)
    rl_action = forward(agent.actor, x)
    il_action = forward(agent.imitation_actor, x)
    q_rl = forward(agent.critic, critic_input(agent, s, s_g, rl_action))[0]
    q_il = forward(agent.critic, critic_input(agent, s, s_g, il_action))[0]
    if q_il > q_rl:
        agent.dual_counts["il"] += 1
        return il_action
    agent.dual_counts["rl"] += 1
    return rl_action
