import statistics
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotorkit.errors import ConfigInvalid, DateNotFound, InsufficientData, ZeroVariance
from rotorkit.panel import IndexSeries, Panel
from rotorkit.rotation import (
    RegimeConfig,
    RegimeWindow,
    change_comovement,
    detect_rotation_episodes,
    detect_stock_fund_regime,
    market_shares,
    shares_to_csv,
    window_return,
)

D = date.fromisoformat


def days(n):
    return [date(2023, 1, 1) + timedelta(i) for i in range(n)]


def test_shares_equal_series():
    p = Panel.from_arrays(days(3), {"A": [2, 3, 4], "B": [2, 3, 4]})
    assert market_shares(p).tolist() == [[0.5, 0.5]] * 3


def test_shares_table2(table2):
    s = market_shares(table2)
    assert s[0, 0] == pytest.approx(505534.1655 / 814204.7071, abs=1e-12)
    assert s[0, 0] == pytest.approx(0.62089, abs=1e-5)
    assert np.all(np.abs(s.sum(axis=1) - 1) <= 1e-12)


def test_shares_single_series():
    p = Panel((IndexSeries("A", days(3), [1, 5, 9]),))
    assert market_shares(p).ravel().tolist() == [1.0, 1.0, 1.0]


def test_regime_constant_aggregate():
    p = Panel.from_arrays(days(10), {"A": np.linspace(1, 9, 10), "B": np.linspace(9, 1, 10)})
    (w,) = detect_stock_fund_regime(p)
    assert (w.start, w.end, w.rows) == (p.dates[0], p.dates[-1], 10)


def test_regime_table2_restricted(table2):
    sub = table2.between(D("2023-01-16"), D("2023-04-07"))
    agg = [float(x) for x in sub.aggregate]
    assert max(agg) / min(agg) == pytest.approx(1.0441, abs=1e-4)
    (w,) = detect_stock_fund_regime(sub, RegimeConfig(band_ratio=1.05))
    assert (w.start, w.end) == (D("2023-01-16"), D("2023-04-07"))
    assert w.ratio == pytest.approx(900312.8337 / 862262.5237, abs=1e-9)


def test_regime_table2_full(table2):
    ws = detect_stock_fund_regime(table2)
    assert [(w.start, w.end) for w in ws] == [
        (D("2023-01-03"), D("2023-01-12")),
        (D("2023-01-13"), D("2023-04-07")),
    ]


def test_regime_breaks_at_step():
    vals = [100.0] * 6 + [200.0] * 6
    p = Panel.from_arrays(days(12), {"A": vals, "B": vals})
    ws = detect_stock_fund_regime(p)
    assert [(w.start, w.end) for w in ws] == [(p.dates[0], p.dates[5]), (p.dates[6], p.dates[11])]


def test_regime_min_window():
    vals = [100.0, 100.0, 300.0, 900.0, 900.0]
    p = Panel.from_arrays(days(5), {"A": vals, "B": vals})
    ws = detect_stock_fund_regime(p, RegimeConfig(min_window_days=2))
    assert [w.rows for w in ws] == [2, 2]


@pytest.mark.parametrize("kw", [{"band_ratio": 1.0}, {"min_window_days": 1}])
def test_regime_config_invalid(kw):
    with pytest.raises(ConfigInvalid):
        RegimeConfig(**kw)


def test_window_return_table2(table2):
    gem = window_return(table2["GEM"], D("2023-02-01"), D("2023-03-15"))
    sse = window_return(table2["SSE"], D("2023-02-01"), D("2023-03-15"))
    assert gem == pytest.approx((58143.5074 - 64750.5598) / 64750.5598, abs=1e-12)
    assert gem == pytest.approx(-0.10204, abs=1e-5)
    assert sse == pytest.approx(0.00801, abs=1e-5)


def test_window_return_flat_and_errors(table2):
    # 2023/1/7 and 1/8 repeat every value
    assert window_return(table2["STAR50"], D("2023-01-07"), D("2023-01-08")) == 0.0
    with pytest.raises(DateNotFound):
        window_return(table2["SSE"], D("2023-01-01"), D("2023-01-08"))
    with pytest.raises(ValueError):
        window_return(table2["SSE"], D("2023-01-08"), D("2023-01-08"))


def test_episode_feb_mar(table2):
    w = RegimeWindow(D("2023-02-01"), D("2023-03-15"))
    (ep,) = detect_rotation_episodes(table2, [w], 0.005)
    assert "SSE" in ep.recipients
    assert {"GEM", "SZI"} <= set(ep.donors)
    assert abs(sum(ep.share_delta.values())) <= 1e-12
    # share arithmetic straight from the printed rows
    s0 = 551731.2942 / 888475.8719
    s1 = 556150.7174 / 872162.2772
    assert ep.share_delta["SSE"] == pytest.approx(s1 - s0, abs=1e-12)


def test_episode_common_scaling():
    p = Panel.from_arrays(days(4), {"A": [1, 2, 3, 4], "B": [3, 6, 9, 12]})
    w = RegimeWindow(p.dates[0], p.dates[-1])
    assert detect_rotation_episodes(p, [w]) == []


def test_episode_pure_transfer():
    p = Panel.from_arrays(days(3), {"A": [60, 55, 50], "B": [40, 45, 50]})
    (ep,) = detect_rotation_episodes(p, [RegimeWindow(p.dates[0], p.dates[-1])])
    assert ep.donors == ("A",) and ep.recipients == ("B",)
    assert ep.share_delta["A"] == pytest.approx(-ep.share_delta["B"], abs=1e-15)


def test_episode_threshold_invalid(table2):
    with pytest.raises(ConfigInvalid):
        detect_rotation_episodes(table2, [], 0)


def test_comovement_self_and_negated():
    a = IndexSeries("a", days(6), [1, 3, 2, 5, 4, 8])
    assert change_comovement(a, a) == pytest.approx(1.0, abs=1e-12)
    diffs = np.diff(a.values)
    neg = IndexSeries("b", a.dates, np.concatenate([[10.0], 10.0 - np.cumsum(diffs)]))
    assert change_comovement(a, neg) == pytest.approx(-1.0, abs=1e-12)


def test_comovement_errors():
    a = IndexSeries("a", days(4), [1, 2, 3, 4])
    b = IndexSeries("b", days(4), [1, 3, 2, 5])
    with pytest.raises(ZeroVariance):
        change_comovement(a, b)
    with pytest.raises(InsufficientData):
        change_comovement(b, b, days(4)[0], days(4)[1])


def test_comovement_table2(table2, table2_rows):
    # independent oracle: statistics.correlation over the printed text
    rows = [r for r in table2_rows if D("2023-02-01") <= _iso(r[0]) <= D("2023-04-07")]
    star = [float(r[2]) for r in rows]
    gem = [float(r[3]) for r in rows]
    oracle = statistics.correlation(np.diff(star).tolist(), np.diff(gem).tolist())
    got = change_comovement(table2["STAR50"], table2["GEM"], D("2023-02-01"), D("2023-04-07"))
    assert got == pytest.approx(oracle, abs=1e-12)
    assert got == pytest.approx(0.5617394241303554, abs=1e-12)  # frozen
    assert np.sign(got) == np.sign(oracle) == 1


def _iso(text):
    y, m, d = (int(x) for x in text.split("/"))
    return date(y, m, d)


def test_shares_csv(table2):
    lines = shares_to_csv(table2).splitlines()
    assert lines[0] == "date,SSE,STAR50,GEM,SZI"
    assert lines[1].startswith("2023-01-03,0.620893,")


@st.composite
def positive_panels(draw):
    n = draw(st.integers(2, 5))
    rows = draw(st.integers(2, 30))
    val = st.floats(1.0, 1e6, allow_nan=False)
    cols = {f"S{i}": draw(st.lists(val, min_size=rows, max_size=rows)) for i in range(n)}
    return Panel.from_arrays(days(rows), cols)


@given(positive_panels())
@settings(max_examples=300, deadline=None)
def test_shares_sum_to_one(p):
    assert np.all(np.abs(market_shares(p).sum(axis=1) - 1) <= 1e-12)


@given(positive_panels(), st.floats(1e-4, 0.05))
@settings(max_examples=300, deadline=None)
def test_episode_deltas_sum_to_zero(p, thr):
    windows = [RegimeWindow(p.dates[0], p.dates[-1]), RegimeWindow(p.dates[0], p.dates[1])]
    for ep in detect_rotation_episodes(p, windows, thr):
        assert abs(sum(ep.share_delta.values())) <= 1e-12
        assert ep.start < ep.end


@given(positive_panels(), st.integers(-20, 20))
@settings(max_examples=300, deadline=None)
def test_regime_scale_invariant(p, k):
    scale = 2.0**k
    q = Panel.from_arrays(p.dates, {s.name: s.values * scale for s in p.series})
    a = [(w.start, w.end) for w in detect_stock_fund_regime(p, RegimeConfig(1.2, 2))]
    b = [(w.start, w.end) for w in detect_stock_fund_regime(q, RegimeConfig(1.2, 2))]
    assert a == b


@given(positive_panels(), st.floats(0.1, 10))
@settings(max_examples=200, deadline=None)
def test_proportional_moves_no_episode(p, growth):
    base = p.matrix[0]
    path = np.linspace(1.0, growth, len(p))
    q = Panel.from_arrays(p.dates, {s.name: base[j] * path for j, s in enumerate(p.series)})
    assert detect_rotation_episodes(q, [RegimeWindow(q.dates[0], q.dates[-1])]) == []


@given(st.floats(1.0, 1e6), st.floats(1.0, 1e6))
def test_return_round_trip(x, y):
    s = IndexSeries("a", days(2), [x, y])
    t = IndexSeries("b", days(2), [y, x])
    fwd = window_return(s, s.dates[0], s.dates[1])
    bwd = window_return(t, t.dates[0], t.dates[1])
    # (y - x) / x loses low bits when y >> x, hence 1e-9
    assert (1 + fwd) * (1 + bwd) == pytest.approx(1.0, rel=1e-9)
