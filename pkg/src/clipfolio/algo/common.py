"""Training data bundle, optimizer settings and the per-epoch training log."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from ..data import AssetPanel, FeatureWindows, ReturnsMatrix, build_windows, compute_returns
from ..errors import DataTooShort

LOG_COLUMNS = ("epoch", "objective", "return_comp", "sharpe_comp", "antibias_comp", "grad_norm", "seconds")


@dataclass(frozen=True, eq=False)
class TrainData:
    windows: FeatureWindows
    returns: ReturnsMatrix

    @property
    def n_assets(self) -> int:
        return self.returns.values.shape[1]

    @property
    def input_dim(self) -> int:
        return self.windows.dim

    def start_range(self, length: int) -> tuple[int, int]:
        """Inclusive range of episode start rows that fit ``length`` days."""
        lo = self.windows.first_row
        hi = min(self.returns.values.shape[0] - length, self.windows.last_row)
        if hi < lo:
            raise DataTooShort(f"no {length}-day episode fits after a {lo}-day warm-up "
                               f"in {self.returns.values.shape[0]} return rows")
        return lo, hi

    def sample_starts(self, gen: np.random.Generator, count: int, length: int) -> np.ndarray:
        lo, hi = self.start_range(length)
        return gen.integers(lo, hi + 1, size=count)


def prepare_data(panel: AssetPanel, window_length: int = 20, use_volume: bool = False,
                 return_scale: float = 100.0) -> TrainData:
    return TrainData(build_windows(panel, window_length, use_volume, return_scale), compute_returns(panel))


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass(frozen=True)
class LogRecord:
    epoch: int
    objective: float
    return_comp: float
    sharpe_comp: float
    antibias_comp: float
    grad_norm: float
    seconds: float


@dataclass
class TrainLog:
    records: list[LogRecord] = field(default_factory=list)
    _t0: float = field(default_factory=time.perf_counter, repr=False, compare=False)

    def add(self, epoch, objective, components, grad_norm) -> None:
        c = np.asarray(components, dtype=float)
        self.records.append(LogRecord(int(epoch), float(objective), float(c[0]), float(c[1]),
                                      float(c[2]), float(grad_norm), time.perf_counter() - self._t0))

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def same_as(self, other: TrainLog) -> bool:
        """Equality of every column except wall-clock seconds."""
        strip = lambda r: (r.epoch, r.objective, r.return_comp, r.sharpe_comp, r.antibias_comp, r.grad_norm)
        return [strip(r) for r in self.records] == [strip(r) for r in other.records]

    def to_csv(self, path, wall_clock: bool = False) -> None:
        """Write the log; the ``seconds`` column is left empty unless ``wall_clock``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(LOG_COLUMNS)
            for r in self.records:
                w.writerow([r.epoch, repr(r.objective), repr(r.return_comp), repr(r.sharpe_comp),
                            repr(r.antibias_comp), repr(r.grad_norm),
                            repr(r.seconds) if wall_clock else ""])
