"""Ratio clipping (PPO) and reward clipping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import InvalidSpec

RATIO_GUARD = 1e-8


@dataclass(frozen=True)
class ClipSpec:
    """Optional lower/upper reward bounds.

    In ``value`` mode the bounds are in units of ``scale`` x daily portfolio
    return (percent with the default scale of 100). In ``ratio`` mode they
    bound the raw ratio of consecutive daily rewards.
    """

    lower: float | None = None
    upper: float | None = None
    mode: str = "value"
    scale: float = 100.0

    def __post_init__(self):
        if self.mode not in ("value", "ratio"):
            raise InvalidSpec(f"unknown clip mode {self.mode!r}")
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise InvalidSpec(f"lower bound {self.lower} must be below upper bound {self.upper}")
        if not self.scale > 0:
            raise InvalidSpec("clip scale must be positive")

    @property
    def unbounded(self) -> bool:
        return self.lower is None and self.upper is None

    @property
    def label(self) -> str:
        parts = [f"{b:g}" for b in (self.lower, self.upper) if b is not None]
        return "_".join(["RC", *parts])


def reward_clip(value, clip: ClipSpec):
    """Clamp ``value`` to whichever bounds ``clip`` sets."""
    out = value
    if clip.upper is not None:
        out = np.minimum(out, clip.upper)
    if clip.lower is not None:
        out = np.maximum(out, clip.lower)
    return float(out) if np.ndim(out) == 0 else out


def ppo_surrogate(ratio, advantage, epsilon):
    """``min(r A, clip(r, 1-eps, 1+eps) A)``, elementwise."""
    r = np.asarray(ratio, dtype=float)
    a = np.asarray(advantage, dtype=float)
    out = np.minimum(r * a, np.clip(r, 1.0 - epsilon, 1.0 + epsilon) * a)
    return float(out) if out.ndim == 0 else out


def ppo_surrogate_grad(ratio, advantage, epsilon):
    """Derivative of :func:`ppo_surrogate` in the ratio; exactly 0 where clipped out."""
    r = np.asarray(ratio, dtype=float)
    a = np.asarray(advantage, dtype=float)
    unclipped = r * a <= np.clip(r, 1.0 - epsilon, 1.0 + epsilon) * a
    return np.where(unclipped, a, 0.0)


def _bounds(lower, upper) -> tuple[float, float]:
    return (-np.inf if lower is None else lower), (np.inf if upper is None else upper)


def clip_stream(r: np.ndarray, clip: ClipSpec) -> tuple[np.ndarray, Callable[[np.ndarray], np.ndarray]]:
    """Clip a (episodes x days) per-step reward stream.

    Returns the clipped stream and a function mapping a gradient w.r.t. the
    clipped stream back to a gradient w.r.t. ``r``. Clamped steps pass no
    gradient.
    """
    lo_v, hi_v = _bounds(*(None if b is None else b / clip.scale for b in (clip.lower, clip.upper)))
    value_rho = np.clip(r, lo_v, hi_v)
    value_pass = (r >= lo_v) & (r <= hi_v)
    if clip.mode == "value":
        return value_rho, lambda g: g * value_pass

    lo, hi = _bounds(clip.lower, clip.upper)
    prev = np.zeros_like(r)
    prev[:, 1:] = r[:, :-1]
    use_ratio = np.abs(prev) >= RATIO_GUARD
    safe = np.where(use_ratio, prev, 1.0)
    q = r / safe
    ratio_pass = use_ratio & (q >= lo) & (q <= hi)
    rho = np.where(use_ratio, np.clip(q, lo, hi), value_rho)

    def back(g: np.ndarray) -> np.ndarray:
        out = np.where(use_ratio, 0.0, g * value_pass)
        gq = np.where(ratio_pass, g, 0.0)
        out += gq / safe
        out[:, :-1] -= (gq * q / safe)[:, 1:]
        return out

    return rho, back
