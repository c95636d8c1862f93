"""PPO with a clipped probability ratio, value error and Dirichlet entropy terms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import dirichlet
from ..env import DEFAULT_MIXING
from ..errors import InvalidSpec
from ..nn import AdamState, LayerSpec, adam_step, backward, forward, init_params
from ..streams import rng
from .clipping import ppo_surrogate, ppo_surrogate_grad
from .common import AdamConfig, TrainData, TrainLog
from .critic import CriticHeads, init_critic
from .rollouts import Batch, active_components, collect


@dataclass(frozen=True)
class PPOConfig:
    epsilon: float = 0.2
    c1: float = 0.5
    c2: float = 0.01
    epochs: int = 4
    minibatch: int = 32
    actors: int = 4
    horizon: int = 252
    gamma: float = 0.99
    iterations: int = 200
    action_period: int = 21
    normalize_advantages: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidSpec("epsilon must be positive")
        if min(self.epochs, self.minibatch, self.actors, self.horizon, self.action_period) < 1:
            raise InvalidSpec("epochs, minibatch, actors, horizon and action_period must be >= 1")
        if not 0 < self.gamma <= 1:
            raise InvalidSpec("gamma must lie in (0, 1]")
        if self.iterations < 0:
            raise InvalidSpec("iterations must be >= 0")


def ppo_full_loss(batch: Batch, params: np.ndarray, spec: LayerSpec, heads: CriticHeads, cfg: PPOConfig):
    """Objective to maximize and its gradients ``(value, actor_grad, critic_grad)``.

    mean[ clipped surrogate - c1 * sum_k (V_k(s) - y_k)^2 + c2 * H(pi(.|s)) ]
    """
    B = len(batch)
    out, tape = forward(params, spec, batch.features)
    alpha = out + 1.0
    logp = dirichlet.logpdf(batch.actions, alpha)
    ratio = np.exp(logp - batch.old_log_density)
    adv = batch.advantages
    surr = ppo_surrogate(ratio, adv, cfg.epsilon)
    ent = dirichlet.entropy(alpha)
    v, ctape = forward(heads.params, heads.spec, batch.features)
    diff = v - batch.value_targets
    value = float(np.mean(surr) - cfg.c1 * np.mean((diff ** 2).sum(axis=1)) + cfg.c2 * np.mean(ent))

    d_ratio = ppo_surrogate_grad(ratio, adv, cfg.epsilon)
    g_alpha = (d_ratio * ratio)[:, None] * dirichlet.logpdf_grad_alpha(batch.actions, alpha)
    if cfg.c2:
        g_alpha = g_alpha + cfg.c2 * dirichlet.entropy_grad_alpha(alpha)
    g_actor = backward(params, spec, tape, g_alpha / B)
    g_critic = backward(heads.params, heads.spec, ctape, -2.0 * cfg.c1 * diff / B)
    return value, g_actor, g_critic


def normalized(adv: np.ndarray) -> np.ndarray:
    if adv.size < 2:
        return adv - adv.mean()
    return (adv - adv.mean()) / (adv.std() + 1e-8)


def train_ppo(data: TrainData, spec: LayerSpec, cfg: PPOConfig = PPOConfig(), seed: int = 0,
              mixing=DEFAULT_MIXING, adam: AdamConfig = AdamConfig(), critic_hidden: Sequence[int] = (64, 32)):
    """Collect ``actors`` episodes with the frozen policy, then K epochs of minibatch ascent."""
    if spec.head != "softplus" or spec.n_in != data.input_dim or spec.n_out != data.n_assets:
        raise InvalidSpec("PPO needs a softplus-head network matching the data")
    data.start_range(cfg.horizon)
    params = init_params(spec, rng(seed, "init"))
    heads = init_critic(spec.n_in, critic_hidden, active_components(mixing).size, rng(seed, "critic"))
    gen, mb_gen = rng(seed, "rollout"), rng(seed, "minibatch")
    a_state = AdamState.zeros(params.size, adam.lr, adam.beta1, adam.beta2, adam.eps)
    c_state = AdamState.zeros(heads.params.size, adam.lr, adam.beta1, adam.beta2, adam.eps)
    log = TrainLog()
    for it in range(cfg.iterations):
        batch = collect(params, spec, heads, data, cfg.actors, cfg.horizon, cfg.action_period,
                        cfg.gamma, mixing, gen)
        if cfg.normalize_advantages:
            batch = Batch(**{**batch.__dict__, "advantages": normalized(batch.advantages)})
        norms = []
        for _ in range(cfg.epochs):
            perm = mb_gen.permutation(len(batch))
            for lo in range(0, len(batch), cfg.minibatch):
                sub = batch.subset(perm[lo:lo + cfg.minibatch])
                _, g_actor, g_critic = ppo_full_loss(sub, params, spec, heads, cfg)
                params, a_state = adam_step(params, g_actor, a_state, maximize=True)
                cp, c_state = adam_step(heads.params, g_critic, c_state, maximize=True)
                heads = heads.with_params(cp)
                norms.append(np.linalg.norm(g_actor))
        log.add(it, batch.episode_rewards.mean(), batch.episode_components.mean(axis=0), np.mean(norms))
    return params, heads, log
