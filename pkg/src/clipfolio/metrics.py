"""Performance statistics in the units of the comparison tables.

Conventions: 252 trading days per year, geometric annualization of returns,
zero risk-free rate, sample (ddof=1) standard deviation, and a downside
deviation averaged over all days with MAR = 0.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateSeries, EmptySeries, NoDownside, TooFewRebalances

TRADING_DAYS = 252
COLUMNS = ("Annual Return", "Sharpe Ratio", "Standard Deviation", "MDD", "Sortino")


@dataclass(frozen=True, eq=False)
class EquityCurve:
    dates: np.ndarray
    values: np.ndarray

    @classmethod
    def from_returns(cls, dates, daily) -> EquityCurve:
        """Curve starting at 1.0 on ``dates[0]``; ``daily[k]`` lands on ``dates[k+1]``."""
        values = np.concatenate(([1.0], np.cumprod(1.0 + np.asarray(daily, dtype=float))))
        return cls(np.asarray(dates), values)


@dataclass(frozen=True)
class MetricRow:
    annual_return: float
    sharpe: float
    stdev: float
    mdd: float
    sortino: float

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)


def _series(daily, minimum: int = 1) -> np.ndarray:
    r = np.asarray(daily, dtype=float)
    if r.ndim != 1 or r.size < minimum:
        raise EmptySeries(f"need at least {minimum} returns, got {r.size}")
    return r


def annualized_return(daily) -> float:
    r = _series(daily)
    growth = np.prod(1.0 + r)
    return float((growth ** (TRADING_DAYS / r.size) - 1.0) * 100.0)


def sharpe(daily) -> float:
    r = _series(daily)
    if r.size < 2 or np.ptp(r) == 0.0:
        raise DegenerateSeries("Sharpe ratio undefined for a series with zero dispersion")
    return float(r.mean() / r.std(ddof=1) * np.sqrt(TRADING_DAYS))


def sortino(daily, mar: float = 0.0) -> float:
    r = _series(daily) - mar
    if not np.any(r < 0):
        raise NoDownside("no return below the minimum acceptable return")
    downside = np.sqrt(np.mean(np.minimum(r, 0.0) ** 2))
    return float(r.mean() / downside * np.sqrt(TRADING_DAYS))


def annualized_stdev(daily) -> float:
    r = _series(daily, 2)
    return float(r.std(ddof=1) * np.sqrt(TRADING_DAYS))


def max_drawdown(curve) -> float:
    """Worst peak-to-trough decline in percent (<= 0), single pass."""
    values = curve.values if isinstance(curve, EquityCurve) else curve
    values = np.ascontiguousarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise EmptySeries("empty equity curve")
    return float(_kernels.max_drawdown_kernel(values))


def turnover(weights) -> float:
    """Mean L1 weight change per rebalance."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] < 2:
        raise TooFewRebalances("need at least two weight vectors")
    return float(np.abs(np.diff(w, axis=0)).sum(axis=1).mean())


def _or_nan(fn, daily) -> float:
    try:
        return fn(daily)
    except (DegenerateSeries, NoDownside, EmptySeries):
        return float("nan")


def metric_row(daily, curve: EquityCurve | np.ndarray | None = None) -> MetricRow:
    """All five table metrics; undefined ratios are NaN, never 0."""
    r = _series(daily)
    if curve is None:
        curve = np.concatenate(([1.0], np.cumprod(1.0 + r)))
    return MetricRow(
        annual_return=annualized_return(r),
        sharpe=_or_nan(sharpe, r),
        stdev=_or_nan(annualized_stdev, r),
        mdd=max_drawdown(curve),
        sortino=_or_nan(sortino, r),
    )
