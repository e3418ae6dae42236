"""Comprehensive development level indices.

Each index (subsystem) is represented by a single indicator, its GMV, with
equal weight, so the level index is just the normalized GMV. Min-max over
the whole analysis window is the default; a trailing rolling window and a
market-share variant exist for sensitivity runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Optional, Union

import numpy as np

from .errors import ConfigInvalid, EmptySeries
from .panel import IndexSeries, Panel

METHODS = ("minmax", "share")


@dataclass(frozen=True)
class NormalizationConfig:
    """Normalization settings.

    Attributes:
        method: ``"minmax"`` (default) or ``"share"`` (value over the panel
            row total; not a per-series transform).
        floor_epsilon: lower clamp; min-max maps each column minimum to 0,
            which would zero the coupling product on that date.
        constant_series_value: output for a window whose max equals its min.
        window: trailing window length in rows; ``None`` uses the whole series.
    """

    method: str = "minmax"
    floor_epsilon: float = 0.01
    constant_series_value: float = 0.5
    window: Optional[int] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigInvalid(f"normalization method must be one of {METHODS}, got {self.method!r}")
        if not 0 < self.floor_epsilon < 0.5:
            raise ConfigInvalid(f"floor_epsilon must be in (0, 0.5), got {self.floor_epsilon}")
        if not 0 < self.constant_series_value <= 1:
            raise ConfigInvalid(
                f"constant_series_value must be in (0, 1], got {self.constant_series_value}"
            )
        if self.window is not None and self.window < 1:
            raise ConfigInvalid(f"window must be >= 1, got {self.window}")


@dataclass(frozen=True)
class LevelIndexVector:
    date: date
    u: tuple[float, ...]
    index_names: tuple[str, ...]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.index_names, self.u))


def _minmax(x: np.ndarray, config: NormalizationConfig) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.full(len(x), config.constant_series_value)
    return (x - lo) / (hi - lo)


def minmax_normalize(
    series: Union[IndexSeries, np.ndarray, list],
    config: NormalizationConfig = NormalizationConfig(),
) -> np.ndarray:
    """Min-max normalize a series into ``[floor_epsilon, 1]``.

    With ``config.window`` set, each point is normalized against the trailing
    ``window`` rows ending at it (fewer at the start of the series).
    """
    x = np.asarray(series.values if isinstance(series, IndexSeries) else series, dtype=np.float64)
    if x.size == 0:
        raise EmptySeries("cannot normalize an empty series")
    if config.window is None or config.window >= len(x):
        out = _minmax(x, config)
    else:
        out = np.empty(len(x))
        w = config.window
        for t in range(len(x)):
            seg = x[max(0, t - w + 1) : t + 1]
            out[t] = _minmax(seg, config)[-1]
    return np.clip(out, config.floor_epsilon, 1.0)


def level_matrix(panel: Panel, config: NormalizationConfig = NormalizationConfig()) -> np.ndarray:
    """Level indices as a (dates x series) array in panel series order."""
    if config.method == "share":
        m = panel.matrix
        if m.size == 0:
            raise EmptySeries("cannot normalize an empty panel")
        return np.clip(m / m.sum(axis=1, keepdims=True), config.floor_epsilon, 1.0)
    return np.column_stack([minmax_normalize(s, config) for s in panel.series])


def compute_level_indices(
    panel: Panel, config: NormalizationConfig = NormalizationConfig()
) -> list[LevelIndexVector]:
    u = level_matrix(panel, config)
    names = tuple(panel.names)
    return [
        LevelIndexVector(day, tuple(float(v) for v in row), names)
        for day, row in zip(panel.dates, u)
    ]
