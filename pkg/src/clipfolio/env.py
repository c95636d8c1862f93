"""Portfolio environment: roll a policy over a date range and score it.

Weights chosen at an action step are held fixed (no drift) for
``action_period`` days; drift is modelled only by the backtester.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dirichlet
from .data import FeatureWindows, ReturnsMatrix
from .errors import (
    DegenerateConcentration,
    DimensionMismatch,
    EpisodeTooShort,
    InvalidSpec,
    NotOnSimplex,
    RangeOutOfBounds,
)
from .metrics import TRADING_DAYS
from .nn import LayerSpec, forward

SIMPLEX_TOL = 1e-9
COMPONENTS = ("return", "sharpe", "antibias")
DEFAULT_MIXING = (1.0, 0.2, 0.05)


@dataclass(frozen=True)
class EpisodeSpec:
    start: int
    length: int = 252
    action_period: int = 21

    def __post_init__(self):
        if not self.length >= self.action_period >= 1:
            raise InvalidSpec("need length >= action_period >= 1")

    @property
    def n_steps(self) -> int:
        return -(-self.length // self.action_period)


@dataclass(frozen=True, eq=False)
class Trajectory:
    start: int
    decision_rows: np.ndarray     # (J,) return row each weight vector first earns
    features: np.ndarray          # (J, D)
    weights: np.ndarray           # (J, N) on the simplex
    step_of_day: np.ndarray       # (T,) action step active on each day
    asset_returns: np.ndarray     # (T, N)
    portfolio_returns: np.ndarray  # (T,)
    log_density: np.ndarray | None = None
    concentrations: np.ndarray | None = None

    @property
    def n_days(self) -> int:
        return self.portfolio_returns.shape[0]

    @property
    def n_steps(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class RewardComponents:
    return_component: float
    sharpe_component: float
    antibias_component: float
    degenerate: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([self.return_component, self.sharpe_component, self.antibias_component])


def on_simplex(w: np.ndarray, tol: float = SIMPLEX_TOL) -> bool:
    w = np.asarray(w)
    return bool(np.all(w >= 0) and np.all(np.abs(w.sum(axis=-1) - 1.0) <= tol))


def portfolio_step_return(weights, daily_returns) -> float:
    w = np.asarray(weights, dtype=float)
    a = np.asarray(daily_returns, dtype=float)
    if w.shape != a.shape or w.ndim != 1:
        raise DimensionMismatch(f"weights {w.shape} vs returns {a.shape}")
    if not on_simplex(w):
        raise NotOnSimplex("weights must be non-negative and sum to 1")
    return float(w @ a)


def policy_weights(output: np.ndarray, head: str) -> np.ndarray:
    """Map network output to portfolio weights (Dirichlet mean for softplus heads)."""
    if head == "softmax":
        return output
    if head == "softplus":
        return dirichlet.mean(output + 1.0)
    raise InvalidSpec(f"head {head!r} does not define a policy")


def episode_layout(episode: EpisodeSpec, windows: FeatureWindows, returns: ReturnsMatrix):
    T, P = episode.length, episode.action_period
    days = np.arange(episode.start, episode.start + T)
    if episode.start < 0 or days[-1] >= returns.values.shape[0]:
        raise RangeOutOfBounds(f"episode rows {episode.start}..{days[-1]} exceed returns")
    step_of_day = np.arange(T) // P
    decision_rows = episode.start + np.arange(episode.n_steps) * P
    if not windows.covers(decision_rows):
        raise RangeOutOfBounds(f"no feature window for rows {decision_rows.min()}..{decision_rows.max()}")
    return decision_rows, days, step_of_day


def _assemble(episode, decision_rows, days, step_of_day, feats, W, returns, **extra) -> Trajectory:
    A = returns.values[days]
    rp = np.einsum("tn,tn->t", W[step_of_day], A)
    return Trajectory(episode.start, decision_rows, feats, W, step_of_day, A, rp, **extra)


def rollout_deterministic(params: np.ndarray, spec: LayerSpec, windows: FeatureWindows,
                          returns: ReturnsMatrix, episode: EpisodeSpec) -> Trajectory:
    rows, days, step_of_day = episode_layout(episode, windows, returns)
    feats = windows.features(rows)
    out, _ = forward(params, spec, feats)
    return _assemble(episode, rows, days, step_of_day, feats, policy_weights(out, spec.head), returns)


def rollout_stochastic(params: np.ndarray, spec: LayerSpec, windows: FeatureWindows,
                       returns: ReturnsMatrix, episode: EpisodeSpec, seed) -> Trajectory:
    """Sample each action from Dirichlet(softplus(logits) + 1)."""
    if spec.head != "softplus":
        raise InvalidSpec("stochastic rollouts need a softplus head")
    gen = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    rows, days, step_of_day = episode_layout(episode, windows, returns)
    feats = windows.features(rows)
    out, _ = forward(params, spec, feats)
    alpha = out + 1.0
    if not np.all(alpha > 0):
        raise DegenerateConcentration("non-positive Dirichlet concentration")
    W = np.stack([gen.dirichlet(a) for a in alpha])
    logp = dirichlet.logpdf(W, alpha)
    return _assemble(episode, rows, days, step_of_day, feats, W, returns,
                     log_density=logp, concentrations=alpha)


def normalized_entropy(W: np.ndarray) -> np.ndarray:
    """Row-wise entropy / ln(N); defined as 1 for a single asset."""
    W = np.atleast_2d(W)
    n = W.shape[-1]
    if n == 1:
        return np.ones(W.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(W > 0, W * np.log(W), 0.0)
    return -plogp.sum(axis=-1) / np.log(n)


def annualized_sharpe(r: np.ndarray) -> tuple[float, bool]:
    """Sharpe with the metrics convention; ``(0.0, True)`` when degenerate."""
    if r.size < 2 or np.ptp(r) == 0.0:
        return 0.0, True
    return float(r.mean() / r.std(ddof=1) * np.sqrt(TRADING_DAYS)), False


def compute_reward_components(traj: Trajectory) -> RewardComponents:
    r = traj.portfolio_returns
    if r.size < 2:
        raise EpisodeTooShort("need at least 2 days")
    s, degenerate = annualized_sharpe(r)
    return RewardComponents(float(r.mean()), s, float(normalized_entropy(traj.weights).mean()), degenerate)


def step_reward_components(traj: Trajectory) -> np.ndarray:
    """Per-action-step raw components (J x 3): period mean return, period Sharpe, antibias."""
    out = np.empty((traj.n_steps, 3))
    r = traj.portfolio_returns
    for j in range(traj.n_steps):
        seg = r[traj.step_of_day == j]
        out[j, 0] = seg.mean()
        out[j, 1] = annualized_sharpe(seg)[0]
    out[:, 2] = normalized_entropy(traj.weights)
    return out


def aggregate_env_reward(components: RewardComponents, mixing=DEFAULT_MIXING) -> float:
    m = np.asarray(mixing, dtype=float)
    if m.shape != (3,) or not np.all(np.isfinite(m)) or np.any(m < 0):
        raise InvalidSpec("mixing needs three finite non-negative weights")
    return float(m[0] * components.return_component + m[1] * components.sharpe_component
                 + m[2] * components.antibias_component)
