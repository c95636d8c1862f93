"""Advantage actor-critic with one value head per reward component."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import dirichlet
from ..env import DEFAULT_MIXING
from ..errors import InvalidSpec
from ..nn import AdamState, LayerSpec, adam_step, backward, forward, init_params
from ..streams import rng
from .common import AdamConfig, TrainData, TrainLog
from .critic import critic_loss_grad, init_critic
from .ppo import PPOConfig
from .rollouts import active_components, collect


def policy_gradient(params: np.ndarray, spec: LayerSpec, features: np.ndarray, actions: np.ndarray,
                    weights: np.ndarray) -> np.ndarray:
    """Gradient of ``mean(weights * log pi(actions | features))``."""
    out, tape = forward(params, spec, features)
    g_alpha = weights[:, None] * dirichlet.logpdf_grad_alpha(actions, out + 1.0)
    return backward(params, spec, tape, g_alpha / features.shape[0])


def train_actor_critic(data: TrainData, spec: LayerSpec, cfg: PPOConfig = PPOConfig(), seed: int = 0,
                       mixing=DEFAULT_MIXING, adam: AdamConfig = AdamConfig(),
                       critic_hidden: Sequence[int] = (64, 32)):
    """Per iteration: one advantage-weighted actor step, then ``cfg.epochs`` critic regression steps."""
    if spec.head != "softplus" or spec.n_in != data.input_dim or spec.n_out != data.n_assets:
        raise InvalidSpec("actor-critic needs a softplus-head network matching the data")
    data.start_range(cfg.horizon)
    params = init_params(spec, rng(seed, "init"))
    heads = init_critic(spec.n_in, critic_hidden, active_components(mixing).size, rng(seed, "critic"))
    gen = rng(seed, "rollout")
    a_state = AdamState.zeros(params.size, adam.lr, adam.beta1, adam.beta2, adam.eps)
    c_state = AdamState.zeros(heads.params.size, adam.lr, adam.beta1, adam.beta2, adam.eps)
    log = TrainLog()
    for it in range(cfg.iterations):
        batch = collect(params, spec, heads, data, cfg.actors, cfg.horizon, cfg.action_period,
                        cfg.gamma, mixing, gen)
        g_actor = policy_gradient(params, spec, batch.features, batch.actions, batch.advantages)
        params, a_state = adam_step(params, g_actor, a_state, maximize=True)
        for _ in range(cfg.epochs):
            _, g_critic = critic_loss_grad(heads, batch.features, batch.value_targets)
            cp, c_state = adam_step(heads.params, g_critic, c_state)
            heads = heads.with_params(cp)
        log.add(it, batch.episode_rewards.mean(), batch.episode_components.mean(axis=0),
                np.linalg.norm(g_actor))
    return params, heads, log
