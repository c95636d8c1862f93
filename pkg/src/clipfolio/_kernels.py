"""Sequential inner loops with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``CLIPFOLIO_DISABLE_NUMBA`` is
unset (or set to ``0``/``false``). Both paths are always importable under
explicit names so they can be tested and benchmarked against each other.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("CLIPFOLIO_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by CLIPFOLIO_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA


# -- max drawdown ------------------------------------------------------------

def max_drawdown_numpy(values: np.ndarray) -> float:
    running = np.maximum.accumulate(values)
    return float((values / running - 1.0).min() * 100.0)


def _max_drawdown_loop(values):
    peak = values[0]
    worst = 0.0
    for i in range(values.shape[0]):
        x = values[i]
        if x > peak:
            peak = x
        dd = x / peak - 1.0
        if dd < worst:
            worst = dd
    return worst * 100.0


# -- buy-and-hold simulation between rebalances --------------------------------

def simulate_numpy(returns: np.ndarray, targets: np.ndarray, starts: np.ndarray):
    """Daily portfolio returns when ``targets[k]`` is set at day ``starts[k]``.

    Weights drift with prices between rebalances. Returns ``(daily, bad)``
    where ``bad`` is the first day whose gross value is non-positive, else -1.
    """
    T = returns.shape[0]
    out = np.empty(T)
    bounds = list(starts) + [T]
    for k in range(len(starts)):
        seg = returns[bounds[k]:bounds[k + 1]]
        if seg.shape[0] == 0:
            continue
        growth = np.cumprod(1.0 + seg, axis=0)
        value = growth @ targets[k]
        prev = np.concatenate(([1.0], value[:-1]))
        with np.errstate(divide="ignore", invalid="ignore"):
            out[bounds[k]:bounds[k + 1]] = value / prev - 1.0
        if np.any(value <= 0.0):
            bad = int(np.argmax(value <= 0.0))
            out[bounds[k] + bad:] = np.nan
            return out, bounds[k] + bad
    return out, -1


def _simulate_loop(returns, targets, starts):
    T, N = returns.shape
    out = np.empty(T)
    w = np.zeros(N)
    k = 0
    K = starts.shape[0]
    for t in range(T):
        if k < K and starts[k] == t:
            for i in range(N):
                w[i] = targets[k, i]
            k += 1
        r = 0.0
        denom = 0.0
        for i in range(N):
            r += w[i] * returns[t, i]
            denom += w[i] * (1.0 + returns[t, i])
        out[t] = r
        if denom <= 0.0:
            for j in range(t, T):
                out[j] = np.nan
            return out, t
        for i in range(N):
            w[i] = w[i] * (1.0 + returns[t, i]) / denom
    return out, -1


if HAVE_NUMBA:
    max_drawdown_numba = njit(cache=True)(_max_drawdown_loop)
    simulate_numba = njit(cache=True)(_simulate_loop)
    max_drawdown_kernel = max_drawdown_numba
    simulate_kernel = simulate_numba
else:
    max_drawdown_numba = None
    simulate_numba = None
    max_drawdown_kernel = max_drawdown_numpy
    simulate_kernel = simulate_numpy

# pure-python loop variants double as readable references
max_drawdown_python = _max_drawdown_loop
simulate_python = _simulate_loop
