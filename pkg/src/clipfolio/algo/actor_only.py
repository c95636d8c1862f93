"""Deterministic policy-gradient ascent on episode rewards (actor only).

The reward-clipping trainer is the same loop with each daily reward passed
through a clamp before the episode components are formed; it has no critic.
"""

from __future__ import annotations

import numpy as np

from ..env import DEFAULT_MIXING
from ..errors import EpisodeTooShort, InvalidSpec
from ..metrics import TRADING_DAYS
from ..nn import AdamState, LayerSpec, adam_step, backward, forward, init_params
from ..streams import rng
from .clipping import ClipSpec, clip_stream
from .common import AdamConfig, TrainData, TrainLog

SQRT_YEAR = np.sqrt(TRADING_DAYS)


def episode_objective(params: np.ndarray, spec: LayerSpec, data: TrainData, starts, length: int = 252,
                      action_period: int = 21, mixing=DEFAULT_MIXING, clip: ClipSpec | None = None):
    """Mean mixed reward over the episodes beginning at ``starts``.

    Returns ``(objective, gradient, components)`` where ``components`` is the
    (episodes x 3) array of raw return / Sharpe / antibias components.
    """
    if spec.head != "softmax":
        raise InvalidSpec("deterministic policies use a softmax head")
    if length < 2:
        raise EpisodeTooShort(f"episode length {length} < 2; the Sharpe term needs two returns")
    mix = np.asarray(mixing, dtype=float)
    starts = np.asarray(starts)
    E, T, P = starts.size, length, action_period
    J = -(-T // P)
    rows = starts[:, None] + np.arange(J) * P
    feats = data.windows.features(rows.ravel())
    W, tape = forward(params, spec, feats)
    N = W.shape[1]
    W3 = W.reshape(E, J, N)
    A = data.returns.values[starts[:, None] + np.arange(T)]
    step = np.arange(T) // P
    r = np.einsum("etn,etn->et", W3[:, step], A)

    if clip is None or clip.unbounded:
        rho, back = r, None
    else:
        rho, back = clip_stream(r, clip)

    m = rho.mean(axis=1)
    s = rho.std(axis=1, ddof=1)
    live = np.ptp(rho, axis=1) > 0
    s_safe = np.where(live, s, 1.0)
    sharpe = np.where(live, m / s_safe * SQRT_YEAR, 0.0)
    if N > 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(W3 > 0, W3 * np.log(W3), 0.0)
        antibias = -plogp.sum(axis=2).mean(axis=1) / np.log(N)
    else:
        antibias = np.ones(E)
    comps = np.stack([m, sharpe, antibias], axis=1)
    objective = float((comps @ mix).mean())

    dm = 1.0 / T
    ds = (rho - m[:, None]) / ((T - 1) * s_safe[:, None])
    g_sharpe = SQRT_YEAR * (dm / s_safe[:, None] - (m / s_safe ** 2)[:, None] * ds)
    g_rho = (mix[0] * dm + mix[1] * np.where(live[:, None], g_sharpe, 0.0)) / E
    g_r = g_rho if back is None else back(g_rho)
    gW = np.add.reduceat(g_r[..., None] * A, np.arange(J) * P, axis=1)
    if N > 1 and mix[2] != 0:
        gW = gW - mix[2] * (np.log(np.maximum(W3, 1e-300)) + 1.0) / (E * J * np.log(N))
    grad = backward(params, spec, tape, gW.reshape(E * J, N))
    return objective, grad, comps


def train_actor_only(data: TrainData, spec: LayerSpec, episodes: int = 8, epochs: int = 500, seed: int = 0,
                     mixing=DEFAULT_MIXING, episode_length: int = 252, action_period: int = 21,
                     adam: AdamConfig = AdamConfig(), clip: ClipSpec | None = None):
    """Adam ascent on the mean mixed reward of ``episodes`` random episodes per epoch."""
    if spec.n_in != data.input_dim or spec.n_out != data.n_assets:
        raise InvalidSpec(f"network {spec.sizes} does not fit inputs {data.input_dim} / assets {data.n_assets}")
    data.start_range(episode_length)
    params = init_params(spec, rng(seed, "init"))
    gen = rng(seed, "rollout")
    state = AdamState.zeros(params.size, adam.lr, adam.beta1, adam.beta2, adam.eps)
    log = TrainLog()
    for epoch in range(epochs):
        starts = data.sample_starts(gen, episodes, episode_length)
        obj, grad, comps = episode_objective(params, spec, data, starts, episode_length,
                                             action_period, mixing, clip)
        params, state = adam_step(params, grad, state, maximize=True)
        log.add(epoch, obj, comps.mean(axis=0), np.linalg.norm(grad))
    return params, log


def train_reward_clip(data: TrainData, spec: LayerSpec, clip: ClipSpec = ClipSpec(lower=-0.4),
                      episodes: int = 8, epochs: int = 500, seed: int = 0, **kwargs):
    return train_actor_only(data, spec, episodes, epochs, seed, clip=clip, **kwargs)
