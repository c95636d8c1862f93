"""Market data: loading, validation, synthesis, returns and feature windows."""

from __future__ import annotations

import csv
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InvalidRange,
    InvalidSpec,
    MisalignedDates,
    NonPositivePrice,
    PanelTooShort,
    ParseError,
    UnknownAssetClass,
)
from .streams import rng

ASSET_CLASSES = ("equity", "bond_intermediate", "bond_long", "commodity", "gold")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def as_date(value) -> np.datetime64:
    return np.datetime64(value, "D")


@dataclass(frozen=True, eq=False)
class AssetPanel:
    """Aligned date x asset closing prices (and optional volumes).

    ``volume`` is ``None`` when no asset carries volume; otherwise missing
    entries are NaN.
    """

    dates: np.ndarray
    assets: tuple[str, ...]
    classes: tuple[str, ...]
    close: np.ndarray
    volume: np.ndarray | None = None

    def __post_init__(self):
        dates = np.asarray(self.dates).astype("datetime64[D]")
        close = np.asarray(self.close, dtype=float)
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "classes", tuple(self.classes))
        if close.ndim != 2 or close.shape != (len(dates), len(self.assets)):
            raise InvalidSpec(f"close shape {close.shape} does not match dates x assets")
        if len(self.classes) != len(self.assets):
            raise InvalidSpec("one asset class per asset required")
        if len(set(self.assets)) != len(self.assets):
            raise InvalidSpec("duplicate asset identifiers")
        for a, c in zip(self.assets, self.classes):
            if c not in ASSET_CLASSES:
                raise UnknownAssetClass(a)
        if len(dates) > 1 and not np.all(dates[1:] > dates[:-1]):
            raise InvalidSpec("dates must be strictly increasing")
        bad = ~(np.isfinite(close) & (close > 0))
        if bad.any():
            t, i = np.argwhere(bad)[0]
            raise NonPositivePrice(self.assets[i], str(dates[t]))
        object.__setattr__(self, "dates", _readonly(dates))
        object.__setattr__(self, "close", _readonly(close))
        if self.volume is not None:
            vol = np.asarray(self.volume, dtype=float)
            if vol.shape != close.shape:
                raise InvalidSpec("volume shape must match close")
            if np.any(vol < 0):
                raise InvalidSpec("volumes must be non-negative")
            object.__setattr__(self, "volume", _readonly(vol))

    @property
    def n_days(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    @property
    def class_map(self) -> dict[str, str]:
        return dict(zip(self.assets, self.classes))

    def index_of(self, date) -> int:
        d = as_date(date)
        i = int(np.searchsorted(self.dates, d))
        if i >= self.n_days or self.dates[i] != d:
            raise KeyError(f"{d} is not a trading date of this panel")
        return i

    def take(self, mask_or_index) -> AssetPanel:
        vol = None if self.volume is None else self.volume[mask_or_index]
        return AssetPanel(self.dates[mask_or_index], self.assets, self.classes,
                          self.close[mask_or_index], vol)


@dataclass(frozen=True, eq=False)
class ReturnsMatrix:
    """Simple daily returns; row ``k`` is realized on ``dates[k]`` (panel day k+1)."""

    dates: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class FeatureWindow:
    """Model input for the weights that earn return row ``t``.

    The tensor holds return rows ``t-L .. t-1`` (panel closes up to index
    ``t``), so nothing on or after the decision date ``returns.dates[t]``
    is visible.
    """

    t: int
    tensor: np.ndarray


class FeatureWindows(Sequence):
    """Stacked feature windows for consecutive decision rows."""

    def __init__(self, first_row: int, matrix: np.ndarray, window_length: int,
                 n_assets: int, use_volume: bool, return_scale: float):
        matrix.flags.writeable = False
        self.first_row = first_row
        self.matrix = matrix
        self.window_length = window_length
        self.n_assets = n_assets
        self.use_volume = use_volume
        self.return_scale = return_scale

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return FeatureWindow(self.first_row + i, self.matrix[i])

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def last_row(self) -> int:
        return self.first_row + len(self) - 1

    def covers(self, rows) -> bool:
        rows = np.asarray(rows)
        return bool(rows.size == 0 or (rows.min() >= self.first_row and rows.max() <= self.last_row))

    def features(self, rows) -> np.ndarray:
        return self.matrix[np.asarray(rows) - self.first_row]


@dataclass(frozen=True)
class Regime:
    start_day: int
    drift_multiplier: float | Sequence[float] = 1.0
    volatility_multiplier: float | Sequence[float] = 1.0


@dataclass(frozen=True)
class SyntheticSpec:
    """Geometric Brownian motion with piecewise regime multipliers.

    ``n_days`` counts simulated daily moves, so the panel has ``n_days + 1``
    rows (row 0 is the base price of 100). Drift and volatility are per-day
    log-price parameters, scalar or one per asset. A regime applies from its
    ``start_day`` (1-based move index) until the next regime starts;
    multipliers may be scalar or per asset.
    """

    n_assets: int
    n_days: int
    drift: float | Sequence[float] = 0.0
    volatility: float | Sequence[float] = 0.01
    regimes: Sequence[Regime] = ()
    seed: int = 0
    classes: Sequence[str] | None = None
    names: Sequence[str] | None = None
    start_date: str = "2010-01-01"


# -- CSV I/O ---------------------------------------------------------------

def load_class_map(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["asset", "class"]:
            raise ParseError(1, "expected header 'asset,class'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(lineno, "expected 2 fields")
            asset, cls = row[0].strip(), row[1].strip()
            if cls not in ASSET_CLASSES:
                raise ParseError(lineno, f"unknown class {cls!r}")
            if asset in out:
                raise ParseError(lineno, f"duplicate asset {asset!r}")
            out[asset] = cls
    return out


def load_panel_csv(path, class_map: Mapping[str, str] | str | Path) -> AssetPanel:
    """Read a long-format ``date,asset,close,volume`` file into a panel.

    Every asset must have a close on every date that appears in the file;
    holes raise :class:`MisalignedDates` rather than being filled.
    """
    if not isinstance(class_map, Mapping):
        class_map = load_class_map(class_map)
    closes: dict[str, dict[np.datetime64, float]] = {}
    volumes: dict[str, dict[np.datetime64, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["date", "asset", "close", "volume"]:
            raise ParseError(1, "expected header 'date,asset,close,volume'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(lineno, f"expected 4 fields, got {len(row)}")
            raw_date, asset, raw_close, raw_vol = (c.strip() for c in row)
            try:
                date = np.datetime64(raw_date, "D")
                if str(date) != raw_date:
                    raise ValueError(raw_date)
            except ValueError:
                raise ParseError(lineno, f"bad date {raw_date!r}") from None
            try:
                price = float(raw_close)
            except ValueError:
                raise ParseError(lineno, f"bad close {raw_close!r}") from None
            if not (math.isfinite(price) and price > 0):
                raise NonPositivePrice(asset, raw_date)
            series = closes.setdefault(asset, {})
            if date in series:
                raise ParseError(lineno, f"duplicate row for {asset} on {raw_date}")
            series[date] = price
            if raw_vol:
                try:
                    v = float(raw_vol)
                except ValueError:
                    raise ParseError(lineno, f"bad volume {raw_vol!r}") from None
                if not (math.isfinite(v) and v >= 0):
                    raise ParseError(lineno, f"bad volume {raw_vol!r}")
                volumes.setdefault(asset, {})[date] = v
    if not closes:
        raise ParseError(2, "no data rows")
    assets = list(closes)
    for a in assets:
        if a not in class_map or class_map[a] not in ASSET_CLASSES:
            raise UnknownAssetClass(a)
    all_dates = sorted(set().union(*(s.keys() for s in closes.values())))
    for a in assets:
        if len(closes[a]) != len(all_dates):
            missing = next(d for d in all_dates if d not in closes[a])
            raise MisalignedDates(a, str(missing))
    close = np.array([[closes[a][d] for a in assets] for d in all_dates], dtype=float)
    volume = None
    if volumes:
        volume = np.array([[volumes.get(a, {}).get(d, np.nan) for a in assets] for d in all_dates])
    return AssetPanel(np.array(all_dates, dtype="datetime64[D]"), assets,
                      [class_map[a] for a in assets], close, volume)


def write_panel_csv(panel: AssetPanel, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("date,asset,close,volume\n")
        for t, d in enumerate(panel.dates):
            for i, a in enumerate(panel.assets):
                v = "" if panel.volume is None or np.isnan(panel.volume[t, i]) else repr(float(panel.volume[t, i]))
                fh.write(f"{d},{a},{float(panel.close[t, i])!r},{v}\n")


def write_class_map(panel: AssetPanel, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("asset,class\n")
        for a, c in zip(panel.assets, panel.classes):
            fh.write(f"{a},{c}\n")


# -- synthesis -------------------------------------------------------------

def _per_asset(value, n: int, what: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (n,)) if np.ndim(value) == 0 else np.asarray(value, dtype=float)
    if arr.shape != (n,):
        raise InvalidSpec(f"{what} needs 1 or {n} values, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidSpec(f"{what} must be finite")
    return arr.astype(float)


def generate_synthetic(spec: SyntheticSpec) -> AssetPanel:
    n, days = spec.n_assets, spec.n_days
    if n < 1:
        raise InvalidSpec("n_assets must be >= 1")
    if days < 2:
        raise InvalidSpec("n_days must be >= 2")
    drift = _per_asset(spec.drift, n, "drift")
    vol = _per_asset(spec.volatility, n, "volatility")
    if np.any(vol < 0):
        raise InvalidSpec("volatilities must be >= 0")
    starts = [r.start_day for r in spec.regimes]
    if any(s < 1 or s > days for s in starts) or any(b <= a for a, b in zip(starts, starts[1:])):
        raise InvalidSpec("regimes must be sorted, non-overlapping and within 1..n_days")
    dmult = np.ones((days, n))
    vmult = np.ones((days, n))
    for k, reg in enumerate(spec.regimes):
        stop = starts[k + 1] if k + 1 < len(starts) else days + 1
        dmult[reg.start_day - 1:stop - 1] = _per_asset(reg.drift_multiplier, n, "drift multiplier")
        vm = _per_asset(reg.volatility_multiplier, n, "volatility multiplier")
        if np.any(vm < 0):
            raise InvalidSpec("volatility multipliers must be >= 0")
        vmult[reg.start_day - 1:stop - 1] = vm
    z = rng(spec.seed, "data").standard_normal((days, n))
    steps = drift * dmult + vol * vmult * z
    logp = np.vstack([np.zeros((1, n)), np.cumsum(steps, axis=0)])
    close = 100.0 * np.exp(logp)
    close[0] = 100.0
    classes = list(spec.classes) if spec.classes is not None else ["equity"] * n
    names = list(spec.names) if spec.names is not None else [f"A{i}" for i in range(n)]
    if len(classes) != n or len(names) != n:
        raise InvalidSpec("classes and names need one entry per asset")
    for c in classes:
        if c not in ASSET_CLASSES:
            raise InvalidSpec(f"unknown asset class {c!r}")
    dates = np.busday_offset(as_date(spec.start_date), np.arange(days + 1), roll="forward")
    return AssetPanel(dates, names, classes, close)


# -- returns and windows ---------------------------------------------------

def compute_returns(panel: AssetPanel) -> ReturnsMatrix:
    if panel.n_days < 2:
        raise PanelTooShort("need at least 2 dates to compute returns")
    c = panel.close
    values = c[1:] / c[:-1] - 1.0
    values.flags.writeable = False
    return ReturnsMatrix(panel.dates[1:], values)


def window_tensor(close: np.ndarray, volume: np.ndarray | None, t: int, window_length: int,
                  use_volume: bool = False, return_scale: float = 100.0) -> np.ndarray:
    """Feature tensor for return row ``t``; reads only ``close[t-L : t+1]``."""
    L = window_length
    c = close[t - L:t + 1]
    rets = (c[1:] / c[:-1] - 1.0) * return_scale
    if not use_volume:
        return rets.reshape(-1)
    if volume is None:
        z = np.zeros_like(rets)
    else:
        v = volume[t - L + 1:t + 1]
        mu = v.mean(axis=0)
        sd = v.std(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            z = (v - mu) / sd
        z[~np.isfinite(z)] = 0.0
    return np.stack([rets, z], axis=-1).reshape(-1)


def build_windows(panel: AssetPanel, window_length: int, use_volume: bool = False,
                  return_scale: float = 100.0) -> FeatureWindows:
    """One window per decision row ``window_length .. T-2``.

    Layout is window_length x assets x features, oldest day first; features
    are the scaled daily return and, when ``use_volume``, the volume z-score
    within the window.
    """
    if window_length < 1:
        raise InvalidSpec("window_length must be positive")
    T = panel.n_days
    if T < window_length + 2:
        raise PanelTooShort(f"need at least {window_length + 2} dates, have {T}")
    rows = range(window_length, T - 1)
    matrix = np.stack([window_tensor(panel.close, panel.volume, t, window_length,
                                     use_volume, return_scale) for t in rows])
    return FeatureWindows(window_length, matrix, window_length, panel.n_assets,
                          use_volume, return_scale)


def split_panel(panel: AssetPanel, train_end, test_start) -> tuple[AssetPanel, AssetPanel]:
    """Disjoint train (``<= train_end``) and test (``>= test_start``) panels."""
    te, ts = as_date(train_end), as_date(test_start)
    first, last = panel.dates[0], panel.dates[-1]
    if not te < ts:
        raise InvalidRange("train_end must precede test_start")
    if te < first or ts > last:
        raise InvalidRange("split dates fall outside the panel")
    train = panel.dates <= te
    test = panel.dates >= ts
    if not train.any() or not test.any():
        raise InvalidRange("split leaves an empty side")
    return panel.take(train), panel.take(test)


def restrict(panel: AssetPanel, start=None, end=None) -> AssetPanel:
    mask = np.ones(panel.n_days, dtype=bool)
    if start is not None:
        mask &= panel.dates >= as_date(start)
    if end is not None:
        mask &= panel.dates <= as_date(end)
    if not mask.any():
        raise InvalidRange(f"no dates in [{start}, {end}]")
    return panel.take(mask)
