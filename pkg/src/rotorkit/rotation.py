"""Fixed-pool rotation diagnostics.

The working assumption is that, over some stretch of time, the total capital
in play is roughly constant. Such stretches ("stock-fund regimes") are found
as windows where the aggregate GMV stays inside a max/min band; large
inflows or outflows push the aggregate out of the band and end the regime.
Inside a window, rotation shows up as shifts in each index's share of the
aggregate: indices losing share are donors, those gaining share recipients.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigInvalid, DateNotFound, InsufficientData, ZeroVariance
from .panel import IndexSeries, Panel, compute_aggregate

DEFAULT_SHARE_THRESHOLD = 0.005


@dataclass(frozen=True)
class RegimeConfig:
    band_ratio: float = 1.05
    min_window_days: int = 5

    def __post_init__(self):
        if not self.band_ratio > 1:
            raise ConfigInvalid(f"band_ratio must be > 1, got {self.band_ratio}")
        if self.min_window_days < 2:
            raise ConfigInvalid(f"min_window_days must be >= 2, got {self.min_window_days}")


@dataclass(frozen=True)
class RegimeWindow:
    start: date
    end: date
    ratio: float = math.nan  # max/min of the aggregate inside the window
    rows: int = 0

    def to_dict(self) -> dict:
        return {
            "start": self.start.isoformat(),
            "end": self.end.isoformat(),
            "ratio": None if math.isnan(self.ratio) else self.ratio,
            "rows": self.rows,
        }


@dataclass(frozen=True)
class RotationEpisode:
    start: date
    end: date
    share_delta: dict[str, float]
    donors: tuple[str, ...]
    recipients: tuple[str, ...]
    returns: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "start": self.start.isoformat(),
            "end": self.end.isoformat(),
            "share_delta": dict(self.share_delta),
            "donors": list(self.donors),
            "recipients": list(self.recipients),
            "returns": dict(self.returns),
        }


def market_shares(panel: Panel) -> np.ndarray:
    """Each index's share of the per-date total, shape (dates x series)."""
    m = panel.matrix
    return m / m.sum(axis=1, keepdims=True)


def detect_stock_fund_regime(
    panel: Panel, config: RegimeConfig = RegimeConfig()
) -> list[RegimeWindow]:
    """Greedy scan for maximal windows whose aggregate max/min stays within the band.

    A window grows row by row until adding the next row would break the band;
    the next window starts at that row. Windows shorter than
    ``min_window_days`` rows are discarded. The aggregate is the sum of the
    series, not any published total column.
    """
    agg = compute_aggregate(panel)
    dates = panel.dates
    out = []
    start = 0
    while start < len(agg):
        lo = hi = agg[start]
        end = start
        while end + 1 < len(agg):
            nlo, nhi = min(lo, agg[end + 1]), max(hi, agg[end + 1])
            if nhi / nlo > config.band_ratio:
                break
            lo, hi, end = nlo, nhi, end + 1
        rows = end - start + 1
        if rows >= config.min_window_days:
            out.append(RegimeWindow(dates[start], dates[end], float(hi / lo), rows))
        start = end + 1
    return out


def window_return(series: IndexSeries, start: date, end: date) -> float:
    if not start < end:
        raise ValueError(f"start {start} must precede end {end}")
    x0 = series.value_at(start)
    x1 = series.value_at(end)
    return (x1 - x0) / x0


def _row(panel: Panel, day: date) -> int:
    try:
        return panel.dates.index(day)
    except ValueError:
        raise DateNotFound(f"{day.isoformat()} not in panel") from None


def rotation_episode(
    panel: Panel, start: date, end: date, share_threshold: float = DEFAULT_SHARE_THRESHOLD
) -> RotationEpisode:
    """Endpoint share deltas over one window, with donors and recipients split by threshold."""
    i, j = _row(panel, start), _row(panel, end)
    shares = market_shares(panel.take([i, j]))
    delta = shares[1] - shares[0]
    names = panel.names
    return RotationEpisode(
        start=start,
        end=end,
        share_delta={n: float(d) for n, d in zip(names, delta)},
        donors=tuple(n for n, d in zip(names, delta) if d < -share_threshold),
        recipients=tuple(n for n, d in zip(names, delta) if d > share_threshold),
        returns={s.name: window_return(s, start, end) for s in panel.series},
    )


def detect_rotation_episodes(
    panel: Panel,
    windows: Sequence[RegimeWindow],
    share_threshold: float = DEFAULT_SHARE_THRESHOLD,
) -> list[RotationEpisode]:
    """One episode per window in which at least one index clears the threshold."""
    if not share_threshold > 0:
        raise ConfigInvalid(f"share_threshold must be > 0, got {share_threshold}")
    out = []
    for w in windows:
        ep = rotation_episode(panel, w.start, w.end, share_threshold)
        if ep.donors or ep.recipients:
            out.append(ep)
    return out


def change_comovement(
    a: IndexSeries, b: IndexSeries, start: Optional[date] = None, end: Optional[date] = None
) -> float:
    """Pearson correlation of day-over-day differences on the dates both series share.

    Raises:
        InsufficientData: fewer than 3 shared dates in the window.
        ZeroVariance: either difference series is constant.
    """
    lo = start or date.min
    hi = end or date.max
    vb = dict(zip(b.dates, b.values))
    shared = [(d, x, vb[d]) for d, x in zip(a.dates, a.values) if lo <= d <= hi and d in vb]
    if len(shared) < 3:
        raise InsufficientData(f"need >= 3 shared dates, got {len(shared)}")
    da = np.diff([s[1] for s in shared])
    db = np.diff([s[2] for s in shared])
    ca, cb = da - da.mean(), db - db.mean()
    sa, sb = math.sqrt(np.dot(ca, ca)), math.sqrt(np.dot(cb, cb))
    if sa == 0 or sb == 0:
        raise ZeroVariance("a difference series is constant over the window")
    return float(np.clip(np.dot(ca, cb) / (sa * sb), -1.0, 1.0))


def shares_to_csv(panel: Panel, precision: int = 6) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", *panel.names])
    for day, row in zip(panel.dates, market_shares(panel)):
        w.writerow([day.isoformat(), *(f"{v:.{precision}f}" for v in row)])
    return buf.getvalue()
