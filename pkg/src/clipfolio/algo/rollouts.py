"""Batch collection for the stochastic (Dirichlet) policy trainers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env import EpisodeSpec, compute_reward_components, rollout_stochastic, step_reward_components
from ..nn import LayerSpec
from .common import TrainData
from .critic import CriticHeads, advantages, critic_targets


def active_components(mixing) -> np.ndarray:
    """Indices of reward components with non-zero mixing weight (one critic head each)."""
    idx = np.flatnonzero(np.asarray(mixing, dtype=float) > 0)
    return idx if idx.size else np.array([0])


@dataclass(frozen=True, eq=False)
class Batch:
    features: np.ndarray         # (B, D)
    actions: np.ndarray          # (B, N)
    old_log_density: np.ndarray  # (B,)
    rewards: np.ndarray          # (B, heads), mixing applied
    terminal: np.ndarray         # (B,)
    value_targets: np.ndarray    # (B, heads)
    advantages: np.ndarray       # (B,)
    episode_components: np.ndarray  # (actors, 3) raw episode components
    episode_rewards: np.ndarray     # (actors,) mixed episode reward

    def __len__(self) -> int:
        return self.features.shape[0]

    def subset(self, idx) -> Batch:
        return Batch(self.features[idx], self.actions[idx], self.old_log_density[idx], self.rewards[idx],
                     self.terminal[idx], self.value_targets[idx], self.advantages[idx],
                     self.episode_components, self.episode_rewards)


def collect(params: np.ndarray, spec: LayerSpec, heads: CriticHeads, data: TrainData, actors: int,
            horizon: int, action_period: int, gamma: float, mixing, gen: np.random.Generator) -> Batch:
    """Run ``actors`` episodes of the current policy and attach TD(0) targets."""
    mix = np.asarray(mixing, dtype=float)
    active = active_components(mix)
    starts = data.sample_starts(gen, actors, horizon)
    feats, acts, logp, rew, term, ep_comps = [], [], [], [], [], []
    for s in starts:
        traj = rollout_stochastic(params, spec, data.windows, data.returns,
                                  EpisodeSpec(int(s), horizon, action_period), gen)
        feats.append(traj.features)
        acts.append(traj.weights)
        logp.append(traj.log_density)
        rew.append((step_reward_components(traj) * mix)[:, active])
        t = np.zeros(traj.n_steps, dtype=bool)
        t[-1] = True
        term.append(t)
        ep_comps.append(compute_reward_components(traj).as_array())
    features = np.concatenate(feats)
    rewards = np.concatenate(rew)
    terminal = np.concatenate(term)
    values = heads.values(features)
    targets = critic_targets(rewards, values, gamma, terminal)
    ep_comps = np.array(ep_comps)
    return Batch(features, np.concatenate(acts), np.concatenate(logp), rewards, terminal, targets,
                 advantages(targets, values), ep_comps, ep_comps @ mix)
