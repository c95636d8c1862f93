"""Training algorithms: actor-only, actor-critic, PPO and reward clipping."""

from .actor_critic import policy_gradient, train_actor_critic
from .actor_only import episode_objective, train_actor_only, train_reward_clip
from .clipping import ClipSpec, clip_stream, ppo_surrogate, ppo_surrogate_grad, reward_clip
from .common import AdamConfig, LogRecord, TrainData, TrainLog, prepare_data
from .critic import (
    CriticHeads,
    advantages,
    critic_loss,
    critic_loss_grad,
    critic_targets,
    init_critic,
    monolithic_critic_loss,
)
from .ppo import PPOConfig, ppo_full_loss, train_ppo
from .rollouts import Batch, active_components, collect

__all__ = [
    "AdamConfig", "Batch", "active_components", "ClipSpec", "CriticHeads", "LogRecord", "PPOConfig", "TrainData", "TrainLog",
    "advantages", "clip_stream", "collect", "critic_loss", "critic_loss_grad", "critic_targets",
    "episode_objective", "init_critic", "monolithic_critic_loss", "policy_gradient", "ppo_full_loss",
    "ppo_surrogate", "ppo_surrogate_grad", "prepare_data", "reward_clip", "train_actor_critic",
    "train_actor_only", "train_ppo", "train_reward_clip",
]
