import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clipfolio.data import (
    Regime,
    SyntheticSpec,
    build_windows,
    compute_returns,
    generate_synthetic,
    load_class_map,
    load_panel_csv,
    restrict,
    split_panel,
    window_tensor,
    write_class_map,
    write_panel_csv,
)
from clipfolio.errors import (
    InvalidRange,
    InvalidSpec,
    MisalignedDates,
    NonPositivePrice,
    PanelTooShort,
    ParseError,
    UnknownAssetClass,
)

from conftest import make_panel


def write(path, text):
    path.write_text(text)
    return path


@pytest.fixture
def classes_csv(tmp_path):
    return write(tmp_path / "classes.csv", "asset,class\nA,equity\nB,bond_long\n")


def test_load_well_formed_file(tmp_path, classes_csv):
    f = write(tmp_path / "p.csv", "date,asset,close,volume\n"
                                  "2020-01-02,A,100,10\n2020-01-02,B,50,\n"
                                  "2020-01-03,A,101,12\n2020-01-03,B,51,\n"
                                  "2020-01-06,A,102,11\n2020-01-06,B,49,\n")
    panel = load_panel_csv(f, classes_csv)
    assert (panel.n_days, panel.n_assets) == (3, 2)
    assert panel.assets == ("A", "B")
    assert panel.classes == ("equity", "bond_long")
    assert panel.close[:, 1].tolist() == [50, 51, 49]
    assert panel.volume[:, 0].tolist() == [10, 12, 11]
    assert np.isnan(panel.volume[:, 1]).all()


def test_zero_price_rejected(tmp_path, classes_csv):
    f = write(tmp_path / "p.csv", "date,asset,close,volume\n2020-01-02,A,100,\n2020-01-02,B,0,\n")
    with pytest.raises(NonPositivePrice):
        load_panel_csv(f, classes_csv)


def test_missing_date_rejected(tmp_path, classes_csv):
    f = write(tmp_path / "p.csv", "date,asset,close,volume\n"
                                  "2020-01-02,A,100,\n2020-01-02,B,50,\n2020-01-03,A,101,\n")
    with pytest.raises(MisalignedDates) as exc:
        load_panel_csv(f, classes_csv)
    assert exc.value.asset == "B"


def test_untagged_asset_and_bad_rows(tmp_path, classes_csv):
    f = write(tmp_path / "p.csv", "date,asset,close,volume\n2020-01-02,C,100,\n")
    with pytest.raises(UnknownAssetClass):
        load_panel_csv(f, classes_csv)
    f = write(tmp_path / "q.csv", "date,asset,close,volume\n2020-01-02,A,abc,\n")
    with pytest.raises(ParseError) as exc:
        load_panel_csv(f, classes_csv)
    assert exc.value.line == 2
    f = write(tmp_path / "r.csv", "date,asset,close\n")
    with pytest.raises(ParseError):
        load_panel_csv(f, classes_csv)
    with pytest.raises(ParseError):
        load_class_map(write(tmp_path / "c.csv", "asset,class\nA,crypto\n"))


def test_csv_round_trip(tmp_path):
    panel = generate_synthetic(SyntheticSpec(3, 30, 0.001, 0.02, (), 4,
                                             classes=("equity", "gold", "commodity")))
    write_panel_csv(panel, tmp_path / "p.csv")
    write_class_map(panel, tmp_path / "c.csv")
    again = load_panel_csv(tmp_path / "p.csv", tmp_path / "c.csv")
    assert np.array_equal(again.close, panel.close)
    assert np.array_equal(again.dates, panel.dates)
    assert again.classes == panel.classes
    write_panel_csv(again, tmp_path / "p2.csv")
    assert (tmp_path / "p.csv").read_bytes() == (tmp_path / "p2.csv").read_bytes()


def test_panel_invariants():
    with pytest.raises(InvalidSpec):
        make_panel([[1.0], [2.0]], names=["A"], start="2020-01-01").take(np.array([1, 0]))
    with pytest.raises(UnknownAssetClass):
        make_panel([[1.0]], classes=["crypto"])
    panel = make_panel([[1.0, 2.0]])
    with pytest.raises(ValueError):
        panel.close[0, 0] = 5.0


def test_synthetic_zero_noise():
    flat = generate_synthetic(SyntheticSpec(3, 50, 0.0, 0.0, (), seed=123))
    assert np.all(flat.close == 100.0)
    grow = generate_synthetic(SyntheticSpec(1, 252, 0.001, 0.0, (), seed=0))
    assert grow.close[-1, 0] == pytest.approx(100 * np.exp(0.252), rel=1e-12)
    assert grow.n_days == 253


def test_synthetic_determinism_and_regimes():
    spec = SyntheticSpec(2, 100, [0.001, 0.0], 0.01, (Regime(40, [-3.0, 1.0], 2.0), Regime(61)), seed=9)
    a, b = generate_synthetic(spec), generate_synthetic(spec)
    assert np.array_equal(a.close, b.close)
    flat = SyntheticSpec(1, 10, 0.01, 0.0, (Regime(4, -1.0), Regime(7)), seed=0)
    steps = np.diff(np.log(generate_synthetic(flat).close[:, 0]))
    assert np.allclose(steps, [0.01, 0.01, 0.01, -0.01, -0.01, -0.01, 0.01, 0.01, 0.01, 0.01])
    with pytest.raises(InvalidSpec):
        generate_synthetic(SyntheticSpec(2, 10, [0.1, 0.2, 0.3]))
    with pytest.raises(InvalidSpec):
        generate_synthetic(SyntheticSpec(1, 10, regimes=(Regime(5), Regime(3))))


def test_returns():
    r = compute_returns(make_panel([[100.0], [110.0], [99.0]]))
    assert r.values[:, 0] == pytest.approx([0.10, -0.10], abs=1e-15)
    assert r.dates[0] == make_panel([[100.0], [110.0], [99.0]]).dates[1]
    assert np.all(compute_returns(make_panel(np.full((5, 2), 7.0))).values == 0)
    with pytest.raises(PanelTooShort):
        compute_returns(make_panel([[1.0]]))


def test_window_count_and_content():
    panel = make_panel(100 + np.arange(20.0).reshape(10, 2))
    windows = build_windows(panel, 5)
    assert len(windows) == 4
    assert windows.first_row == 5 and windows.last_row == 8
    rets = compute_returns(panel).values
    w = windows[0]
    assert w.t == 5
    assert np.allclose(w.tensor.reshape(5, 2), rets[0:5] * 100)
    assert np.all(build_windows(make_panel(np.full((12, 3), 4.0)), 4).matrix == 0)
    with pytest.raises(PanelTooShort):
        build_windows(panel, 9)


def test_volume_zscores():
    close = 100 + np.arange(16.0).reshape(8, 2)
    volume = np.array([[1, np.nan]] * 8, dtype=float)
    volume[:, 0] = np.arange(8)
    w = build_windows(make_panel(close, volume=volume), 3, use_volume=True)
    t = w[0].tensor.reshape(3, 2, 2)
    assert np.allclose(t[:, 0, 1], [-np.sqrt(1.5), 0, np.sqrt(1.5)])
    assert np.all(t[:, 1, 1] == 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 6))
def test_windows_ignore_the_future(seed, L):
    gen = np.random.default_rng(seed)
    close = 100 * np.cumprod(1 + gen.normal(0, 0.02, (L + 12, 2)), axis=0)
    volume = gen.uniform(1, 10, close.shape)
    t = int(gen.integers(L, close.shape[0] - 1))
    base = window_tensor(close, volume, t, L, use_volume=True)
    bumped_c, bumped_v = close.copy(), volume.copy()
    bumped_c[t + 1:] *= 3
    bumped_v[t + 1:] *= 7
    assert np.array_equal(base, window_tensor(bumped_c, bumped_v, t, L, use_volume=True))


def test_split_and_restrict():
    panel = generate_synthetic(SyntheticSpec(2, 99, seed=1))
    mid = panel.dates[50]
    train, test = split_panel(panel, mid, panel.dates[51])
    assert not set(train.dates.tolist()) & set(test.dates.tolist())
    assert train.n_days + test.n_days == panel.n_days
    with pytest.raises(InvalidRange):
        split_panel(panel, mid, mid)
    train, test = split_panel(panel, panel.dates[40], panel.dates[60])
    assert train.dates[-1] == panel.dates[40] and test.dates[0] == panel.dates[60]
    gap = set(panel.dates[41:60].tolist())
    assert not gap & (set(train.dates.tolist()) | set(test.dates.tolist()))
    sub = restrict(panel, panel.dates[10], panel.dates[20])
    assert sub.n_days == 11
