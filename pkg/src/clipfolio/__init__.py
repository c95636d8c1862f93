"""Reinforcement-learning portfolio allocation: actor-only, actor-critic,
PPO and reward clipping, with static baselines and a monthly backtester."""

from ._kernels import USING_NUMBA

__version__ = "0.1.0"
__all__ = ["USING_NUMBA", "__version__"]
