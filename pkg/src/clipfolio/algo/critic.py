"""Decomposed state-value critic: one linear head per reward component.

The heads share a ReLU trunk. Targets are TD(0) on state values, the
continuous-action stand-in for averaging action values over a discrete set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..nn import LayerSpec, backward, forward, init_params


@dataclass(frozen=True, eq=False)
class CriticHeads:
    spec: LayerSpec
    params: np.ndarray

    @property
    def n(self) -> int:
        return self.spec.n_out

    def values(self, features: np.ndarray) -> np.ndarray:
        return forward(self.params, self.spec, features)[0]

    def with_params(self, params: np.ndarray) -> CriticHeads:
        return CriticHeads(self.spec, params)


def init_critic(n_in: int, hidden: Sequence[int], n_heads: int, seed) -> CriticHeads:
    spec = LayerSpec((n_in, *hidden, n_heads), "linear")
    return CriticHeads(spec, init_params(spec, seed))


def critic_targets(rewards: np.ndarray, values: np.ndarray, gamma: float,
                   terminal: np.ndarray | None = None) -> np.ndarray:
    """``R_k(t) + gamma * V_k(s_{t+1})`` per step and head.

    ``rewards`` and ``values`` are (steps x heads) for one episode, or a
    concatenation of episodes with ``terminal`` marking each episode's last
    step; terminal steps use the reward alone.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    if terminal is None:
        terminal = np.zeros(rewards.shape[0], dtype=bool)
        terminal[-1] = True
    nxt = np.zeros_like(values)
    nxt[:-1] = values[1:]
    nxt[terminal] = 0.0
    return rewards + gamma * nxt


def advantages(targets: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Sum over heads of ``target_k - V_k(s)``."""
    return (targets - values).sum(axis=1)


def critic_loss(values: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Batch mean of the per-sample squared error summed over heads, and its value gradient."""
    diff = values - targets
    B = values.shape[0]
    return float((diff ** 2).sum(axis=1).mean()), 2.0 * diff / B


def monolithic_critic_loss(values: np.ndarray, targets: np.ndarray) -> float:
    return float(np.mean((np.ravel(values) - np.ravel(targets)) ** 2))


def critic_loss_grad(heads: CriticHeads, features: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    v, tape = forward(heads.params, heads.spec, features)
    loss, dv = critic_loss(v, targets)
    return loss, backward(heads.params, heads.spec, tape, dv)
