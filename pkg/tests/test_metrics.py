import numpy as np
import pytest

from clipfolio.errors import DegenerateSeries, EmptySeries, NoDownside, TooFewRebalances
from clipfolio.metrics import (
    EquityCurve,
    annualized_return,
    annualized_stdev,
    max_drawdown,
    metric_row,
    sharpe,
    sortino,
    turnover,
)


def test_annualized_return():
    assert annualized_return(np.full(252, 0.0003)) == pytest.approx((1.0003 ** 252 - 1) * 100, rel=1e-12)
    assert annualized_return(np.full(252, 0.0003)) == pytest.approx(7.85, abs=0.01)
    assert annualized_return([0.01]) == pytest.approx((1.01 ** 252 - 1) * 100, rel=1e-12)
    with pytest.raises(EmptySeries):
        annualized_return([])


def test_sharpe_and_stdev():
    assert sharpe([0.01, 0.02, 0.03]) == pytest.approx(2 * np.sqrt(252), rel=1e-12)
    assert annualized_stdev([0.01, -0.01, 0.01, -0.01]) == pytest.approx(0.011547005 * np.sqrt(252), rel=1e-7)
    with pytest.raises(DegenerateSeries):
        sharpe([0.01, 0.01, 0.01])
    with pytest.raises(DegenerateSeries):
        sharpe([0.01])


def test_sortino():
    assert sortino([0.02, -0.01]) == pytest.approx(0.005 / np.sqrt(0.0001 / 2) * np.sqrt(252), rel=1e-12)
    with pytest.raises(NoDownside):
        sortino([0.01, 0.02])


def test_max_drawdown():
    assert max_drawdown(np.array([1.0, 0.8, 0.9])) == pytest.approx(-20.0, abs=1e-12)
    assert max_drawdown(np.array([1.0, 1.1, 1.2])) == 0.0
    curve = EquityCurve.from_returns(np.arange(3), [0.5, -0.5])
    assert curve.values.tolist() == [1.0, 1.5, 0.75]
    assert max_drawdown(curve) == pytest.approx(-50.0)
    with pytest.raises(EmptySeries):
        max_drawdown(np.array([]))


def test_turnover():
    assert turnover([[0.6, 0.4], [0.5, 0.5]]) == pytest.approx(0.2)
    with pytest.raises(TooFewRebalances):
        turnover([[1.0, 0.0]])


def test_metric_row_degenerate_is_nan():
    row = metric_row(np.zeros(10))
    assert row.annual_return == 0.0 and row.mdd == 0.0
    assert np.isnan(row.sharpe) and np.isnan(row.sortino)
    assert len(row.as_tuple()) == 5
