"""Goal-conditioned off-policy learning with demonstration injection."""

from .agent import (Agent, actor_input, critic_input, dual_policy_select,
                    make_agent, policy_action)
from .config import DEMO_MODES, TrainConfig, default_train_config
from .data import (DemoSet, ReplayBuffer, Transition, demo_trajectory,
                   her_relabel, sparse_reward)
from .ddpg import ddpg_update, pretrain, train
from .rollout import (build_demo_set, collect_cycle, env_step, evaluate,
                      run_episode, sample_rl_goal)

__all__ = [
    "Agent",
    "DEMO_MODES",
    "DemoSet",
    "ReplayBuffer",
    "Transition",
    "TrainConfig",
    "actor_input",
    "build_demo_set",
    "collect_cycle",
    "critic_input",
    "ddpg_update",
    "default_train_config",
    "demo_trajectory",
    "dual_policy_select",
    "env_step",
    "evaluate",
    "her_relabel",
    "make_agent",
    "policy_action",
    "pretrain",
    "run_episode",
    "sample_rl_goal",
    "sparse_reward",
    "train",
]
