"""Walk-forward evaluation with monthly rebalancing and buy-and-hold drift.

A rebalance on schedule date ``p`` trades at the close of ``p``; the
strategy sees only closes up to ``p`` and the new weights first earn the
return realized on the next trading day.
"""

from __future__ import annotations

import csv
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import _kernels
from .baselines import all_weather, equal_weight, sixty_forty
from .data import ASSET_CLASSES, AssetPanel, as_date, window_tensor
from .env import on_simplex, policy_weights
from .errors import (
    MismatchedRanges,
    PortfolioWipedOut,
    ScheduleOutOfRange,
    StrategyFailure,
    UnknownAsset,
    UntaggedAsset,
)
from .metrics import COLUMNS, EquityCurve, MetricRow, metric_row, turnover
from .nn import LayerSpec, forward

WeightFn = Callable[[AssetPanel, int], np.ndarray]


@dataclass(frozen=True)
class Strategy:
    """Weight oracle queried with the panel and the rebalance index."""

    name: str
    kind: str  # model | baseline | index
    weight_fn: WeightFn

    def weights(self, panel: AssetPanel, p: int) -> np.ndarray:
        return self.weight_fn(panel, p)


@dataclass(frozen=True, eq=False)
class RebalanceSchedule:
    dates: np.ndarray  # rebalance dates, first is the start of the backtest
    end: np.datetime64

    def __post_init__(self):
        d = np.asarray(self.dates).astype("datetime64[D]")
        if d.size == 0:
            raise ScheduleOutOfRange("empty schedule")
        if np.any(d[1:] <= d[:-1]):
            raise ScheduleOutOfRange("rebalance dates must be strictly increasing")
        object.__setattr__(self, "dates", d)
        object.__setattr__(self, "end", as_date(self.end))

    @property
    def start(self) -> np.datetime64:
        return self.dates[0]


@dataclass(frozen=True, eq=False)
class BacktestReport:
    name: str
    assets: tuple[str, ...]
    classes: tuple[str, ...]
    curve: EquityCurve
    daily: np.ndarray
    metrics: MetricRow
    rebalance_dates: np.ndarray
    weights: np.ndarray          # (rebalances, N) target weights
    turnover: float


def monthly_schedule(panel: AssetPanel, start=None, end=None) -> RebalanceSchedule:
    """``start`` plus the first trading day of every later month up to ``end``."""
    dates = panel.dates
    s = dates[0] if start is None else as_date(start)
    e = dates[-1] if end is None else as_date(end)
    if s < dates[0] or e > dates[-1] or not s < e:
        raise ScheduleOutOfRange(f"[{s}, {e}] not inside panel range [{dates[0]}, {dates[-1]}]")
    inside = dates[(dates >= s) & (dates <= e)]
    months = inside.astype("datetime64[M]")
    first = np.concatenate(([True], months[1:] != months[:-1]))
    return RebalanceSchedule(inside[first], e)


def drift_weights(weights, daily_returns) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    grown = w * (1.0 + np.asarray(daily_returns, dtype=float))
    total = grown.sum()
    if not total > 0:
        raise PortfolioWipedOut("portfolio value fell to zero")
    return grown / total


def run_backtest(strategy: Strategy, panel: AssetPanel, schedule: RebalanceSchedule) -> BacktestReport:
    try:
        p0 = panel.index_of(schedule.start)
        pe = panel.index_of(schedule.end)
        reb = np.array([panel.index_of(d) for d in schedule.dates])
    except KeyError as exc:
        raise ScheduleOutOfRange(str(exc)) from None
    if pe <= p0 or reb[-1] > pe:
        raise ScheduleOutOfRange("schedule must end after its first rebalance")
    reb = reb[reb < pe]  # a rebalance on the final date would never earn a return

    targets = np.empty((reb.size, panel.n_assets))
    for k, p in enumerate(reb):
        try:
            w = np.asarray(strategy.weights(panel, int(p)), dtype=float)
        except Exception as exc:
            raise StrategyFailure(f"{strategy.name} failed on {panel.dates[p]}: {exc}") from exc
        if w.shape != (panel.n_assets,) or not on_simplex(w):
            raise StrategyFailure(f"{strategy.name} returned off-simplex weights on {panel.dates[p]}")
        targets[k] = w

    c = panel.close[p0:pe + 1]
    rets = np.ascontiguousarray(c[1:] / c[:-1] - 1.0)
    daily, bad = _kernels.simulate_kernel(rets, targets, (reb - p0).astype(np.int64))
    if bad >= 0:
        raise PortfolioWipedOut(f"{strategy.name} wiped out on {panel.dates[p0 + bad + 1]}")
    curve = EquityCurve.from_returns(panel.dates[p0:pe + 1], daily)
    return BacktestReport(
        name=strategy.name,
        assets=panel.assets,
        classes=panel.classes,
        curve=curve,
        daily=daily,
        metrics=metric_row(daily, curve),
        rebalance_dates=panel.dates[reb],
        weights=targets,
        turnover=turnover(targets) if reb.size > 1 else 0.0,
    )


# -- strategies ------------------------------------------------------------

def baseline_strategy(name: str) -> Strategy:
    fns = {
        "equal_weight": lambda panel, p: equal_weight(panel.assets),
        "sixty_forty": lambda panel, p: sixty_forty(panel.classes),
        "all_weather": lambda panel, p: all_weather(panel.classes),
    }
    if name not in fns:
        raise KeyError(f"unknown baseline {name!r}")
    return Strategy(name, "baseline", fns[name])


def index_strategy(panel: AssetPanel, asset: str) -> Strategy:
    if asset not in panel.assets:
        raise UnknownAsset(asset)
    i = panel.assets.index(asset)

    def weights(pnl: AssetPanel, p: int) -> np.ndarray:
        w = np.zeros(pnl.n_assets)
        w[i] = 1.0
        return w

    return Strategy(asset, "index", weights)


def model_strategy(name: str, params: np.ndarray, spec: LayerSpec, window_length: int,
                   use_volume: bool = False, return_scale: float = 100.0) -> Strategy:
    """Trained policy; softplus heads act through the Dirichlet mean."""

    def weights(panel: AssetPanel, p: int) -> np.ndarray:
        if p < window_length:
            raise ScheduleOutOfRange(f"rebalance index {p} precedes a full {window_length}-day window")
        x = window_tensor(panel.close, panel.volume, p, window_length, use_volume, return_scale)
        return policy_weights(forward(params, spec, x)[0], spec.head)

    return Strategy(name, "model", weights)


# -- reports ---------------------------------------------------------------

def class_proportions(report: BacktestReport, class_map: Mapping[str, str] | None = None):
    """Per-rebalance weight summed by asset class.

    Returns ``(dates, class_names, matrix)`` with classes in canonical order,
    restricted to classes present in the universe.
    """
    cmap = dict(zip(report.assets, report.classes)) if class_map is None else class_map
    missing = [a for a in report.assets if a not in cmap]
    if missing:
        raise UntaggedAsset(missing[0])
    tags = [cmap[a] for a in report.assets]
    names = [c for c in ASSET_CLASSES if c in tags]
    mat = np.stack([report.weights[:, [i for i, t in enumerate(tags) if t == c]].sum(axis=1)
                    for c in names], axis=1)
    return report.rebalance_dates, names, mat


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[tuple[str, MetricRow], ...]
    columns: tuple[str, ...] = COLUMNS

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("Model", *self.columns))
            for name, m in self.rows:
                w.writerow((name, *(repr(float(v)) for v in m.as_tuple())))


def compare_strategies(reports: Sequence[BacktestReport]) -> ComparisonTable:
    if not reports:
        raise MismatchedRanges("no reports to compare")
    ref = reports[0].curve.dates
    for r in reports[1:]:
        if r.curve.dates.shape != ref.shape or np.any(r.curve.dates != ref):
            raise MismatchedRanges(f"{r.name} covers a different date range than {reports[0].name}")
    return ComparisonTable(tuple((r.name, r.metrics) for r in reports))


def export_report(report: BacktestReport, out_dir) -> list[Path]:
    """Write ``equity_``, ``weights_`` and ``classes_`` CSVs for one report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"equity_{report.name}.csv", out / f"weights_{report.name}.csv",
             out / f"classes_{report.name}.csv"]
    with open(paths[0], "w", newline="") as fh:
        fh.write("date,value\n")
        fh.writelines(f"{d},{float(v)!r}\n" for d, v in zip(report.curve.dates, report.curve.values))
    with open(paths[1], "w", newline="") as fh:
        fh.write("date,asset,weight\n")
        for d, w in zip(report.rebalance_dates, report.weights):
            fh.writelines(f"{d},{a},{float(x)!r}\n" for a, x in zip(report.assets, w))
    dates, names, mat = class_proportions(report)
    with open(paths[2], "w", newline="") as fh:
        fh.write("date,class,weight\n")
        for d, row in zip(dates, mat):
            fh.writelines(f"{d},{c},{float(x)!r}\n" for c, x in zip(names, row))
    return paths


def write_merged_equity(reports: Sequence[BacktestReport], path) -> None:
    compare_strategies(reports)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("date", *(r.name for r in reports)))
        for k, d in enumerate(reports[0].curve.dates):
            w.writerow((str(d), *(repr(float(r.curve.values[k])) for r in reports)))
