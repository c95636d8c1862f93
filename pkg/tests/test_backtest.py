import numpy as np
import pytest

from clipfolio.backtest import (
    RebalanceSchedule,
    Strategy,
    baseline_strategy,
    class_proportions,
    compare_strategies,
    drift_weights,
    export_report,
    index_strategy,
    monthly_schedule,
    run_backtest,
    write_merged_equity,
)
from clipfolio.errors import (
    MismatchedRanges,
    PortfolioWipedOut,
    ScheduleOutOfRange,
    StrategyFailure,
    UnknownAsset,
    UntaggedAsset,
)
from clipfolio.metrics import COLUMNS

from conftest import make_panel


def test_drift_weights():
    assert drift_weights([0.5, 0.5], [1.0, 0.0]) == pytest.approx([2 / 3, 1 / 3], abs=1e-15)
    assert drift_weights([0.2, 0.8], [0.05, 0.05]) == pytest.approx([0.2, 0.8], abs=1e-15)
    with pytest.raises(PortfolioWipedOut):
        drift_weights([1.0, 0.0], [-1.0, 0.0])


def test_monthly_schedule(small_panel):
    sched = monthly_schedule(small_panel)
    assert sched.start == small_panel.dates[0]
    months = sched.dates.astype("datetime64[M]")
    assert np.all(np.diff(months.astype(int)) == 1)
    for d in sched.dates[1:]:
        i = small_panel.index_of(d)
        assert small_panel.dates[i - 1].astype("datetime64[M]") < d.astype("datetime64[M]")
    with pytest.raises(ScheduleOutOfRange):
        monthly_schedule(small_panel, start="1990-01-01")
    with pytest.raises(ScheduleOutOfRange):
        RebalanceSchedule(np.array(["2020-02-01", "2020-01-01"], dtype="datetime64[D]"), "2020-03-01")


def test_flat_prices_keep_equity_constant():
    panel = make_panel(np.full((60, 3), 10.0), classes=("equity", "bond_long", "gold"))
    report = run_backtest(baseline_strategy("equal_weight"), panel, monthly_schedule(panel))
    assert np.all(report.curve.values == 1.0)
    assert report.turnover == 0.0


def test_index_strategy_tracks_asset():
    gen = np.random.default_rng(2)
    close = 50 * np.cumprod(1 + gen.normal(0, 0.01, (80, 2)), axis=0)
    panel = make_panel(close)
    report = run_backtest(index_strategy(panel, "A1"), panel, monthly_schedule(panel))
    assert report.curve.values == pytest.approx(close[:, 1] / close[0, 1], rel=1e-12)
    with pytest.raises(UnknownAsset):
        index_strategy(panel, "ZZZ")


def test_strategy_failures(small_panel):
    sched = monthly_schedule(small_panel)
    off = Strategy("off", "model", lambda panel, p: np.full(panel.n_assets, 0.5))
    with pytest.raises(StrategyFailure):
        run_backtest(off, small_panel, sched)
    boom = Strategy("boom", "model", lambda panel, p: 1 / 0)
    with pytest.raises(StrategyFailure):
        run_backtest(boom, small_panel, sched)
    with pytest.raises(KeyError):
        baseline_strategy("momentum")


def test_wipe_out():
    close = np.array([[10.0, 10.0], [10.0, 10.0], [1e-300, 10.0], [1e-300, 10.0]])
    panel = make_panel(close)
    lev = Strategy("lev", "model", lambda panel, p: np.array([1.0, 0.0]))
    with pytest.raises(PortfolioWipedOut):
        run_backtest(lev, panel, monthly_schedule(panel))
    mixed = Strategy("mixed", "model", lambda panel, p: np.array([0.5, 0.5]))
    assert run_backtest(mixed, panel, monthly_schedule(panel)).curve.values[-1] == pytest.approx(0.5)
    long_short = Strategy("ls", "model", lambda panel, p: np.array([2.0, -1.0]))
    with pytest.raises(StrategyFailure):
        run_backtest(long_short, panel, monthly_schedule(panel))


def test_class_proportions_and_exports(small_panel, tmp_path):
    report = run_backtest(baseline_strategy("sixty_forty"), small_panel, monthly_schedule(small_panel))
    dates, names, mat = class_proportions(report)
    assert names == ["equity", "bond_long", "gold"]
    assert np.allclose(mat.sum(axis=1), 1.0)
    with pytest.raises(UntaggedAsset):
        class_proportions(report, {})
    paths = export_report(report, tmp_path)
    assert [p.name for p in paths] == ["equity_sixty_forty.csv", "weights_sixty_forty.csv",
                                       "classes_sixty_forty.csv"]
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "date,value" and len(lines) == report.curve.values.size + 1


def test_compare_and_merge(small_panel, tmp_path):
    sched = monthly_schedule(small_panel)
    reports = [run_backtest(baseline_strategy(n), small_panel, sched) for n in ("equal_weight", "sixty_forty")]
    table = compare_strategies(reports)
    table.to_csv(tmp_path / "c.csv")
    rows = (tmp_path / "c.csv").read_text().splitlines()
    assert rows[0] == ",".join(("Model", *COLUMNS))
    assert [r.split(",")[0] for r in rows[1:]] == ["equal_weight", "sixty_forty"]
    write_merged_equity(reports, tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "date,equal_weight,sixty_forty"
    short = run_backtest(baseline_strategy("equal_weight"), small_panel,
                         monthly_schedule(small_panel, start=small_panel.dates[30]))
    with pytest.raises(MismatchedRanges):
        compare_strategies([reports[0], short])
    with pytest.raises(MismatchedRanges):
        compare_strategies([])
