"""Coupling degree C, composite level T, coordination degree D and stage labels.

For n subsystems with level indices u:

    C = n * (prod u) ** (1/n) / sum(u)      (ratio of geometric to arithmetic mean)
    T = sum(w * u)
    D = sqrt(C * T)

With n = 4 and equal weights of 0.25 this is the usual four-system model.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigInvalid, DimensionTooSmall, LengthMismatch, OutOfRangeInput, UnknownMember
from .level_index import NormalizationConfig, level_matrix
from .panel import Panel

COUPLING = "coupling"
COORDINATION = "coordination"


@dataclass(frozen=True)
class Weights:
    w: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.w)
        object.__setattr__(self, "w", w)
        if not w:
            raise ConfigInvalid("weights must not be empty")
        if any(x < 0 or not math.isfinite(x) for x in w):
            raise ConfigInvalid(f"weights must be finite and non-negative: {w}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ConfigInvalid(f"weights must sum to 1, got {math.fsum(w)!r}")

    @classmethod
    def equal(cls, n: int) -> "Weights":
        return cls((1.0 / n,) * n)

    def __len__(self):
        return len(self.w)


@dataclass(frozen=True)
class StageLabel:
    kind: str
    name: str
    bounds: tuple[float, float]  # (lower exclusive, upper inclusive)

    @property
    def degenerate(self) -> bool:
        return self.bounds == (0.0, 0.0)


_BANDS = ((0.3, "Initial"), (0.5, "Low-level"), (0.8, "Intermediate"), (1.0, "Advanced"))

STAGES = {
    kind: tuple(
        StageLabel(kind, f"{label} {kind} stage", (lo, hi))
        for lo, (hi, label) in zip((0.0, 0.3, 0.5, 0.8), _BANDS)
    )
    for kind in (COUPLING, COORDINATION)
}

DEGENERATE = {kind: StageLabel(kind, "Degenerate", (0.0, 0.0)) for kind in STAGES}


@dataclass(frozen=True)
class CoordinationPoint:
    date: date
    c: float
    t: float
    d: float
    c_stage: StageLabel
    d_stage: StageLabel

    def to_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "c": self.c,
            "t": self.t,
            "d": self.d,
            "c_stage": self.c_stage.name,
            "d_stage": self.d_stage.name,
        }


def _check_unit(u: np.ndarray, what: str):
    if not np.all(np.isfinite(u)) or np.any(u < 0) or np.any(u > 1):
        raise OutOfRangeInput(f"{what} must lie in [0, 1], got {u.tolist()}")


def coupling_degree(u: Sequence[float]) -> float:
    """Coupling degree of n >= 2 level indices, in [0, 1].

    The geometric mean goes through ``exp(mean(log u))``; any zero component
    short-circuits to 0, as does an all-zero vector.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or len(u) < 2:
        raise DimensionTooSmall(f"coupling needs at least 2 subsystems, got {u.shape}")
    _check_unit(u, "level indices")
    if np.any(u == 0):
        return 0.0
    if np.all(u == u[0]):
        return 1.0
    gm = math.exp(math.fsum(np.log(u)) / len(u))
    am = math.fsum(u) / len(u)
    return min(gm / am, 1.0)


def composite_level(u: Sequence[float], weights: Optional[Weights] = None) -> float:
    u = np.asarray(u, dtype=np.float64)
    if weights is None:
        weights = Weights.equal(len(u))
    if len(weights) != len(u):
        raise LengthMismatch(f"{len(u)} level indices but {len(weights)} weights")
    _check_unit(u, "level indices")
    return min(math.fsum(w * x for w, x in zip(weights.w, u)), 1.0)


def coordination_degree(c: float, t: float) -> float:
    for name, v in (("c", c), ("t", t)):
        if not (0.0 <= v <= 1.0):
            raise OutOfRangeInput(f"{name} must lie in [0, 1], got {v}")
    return math.sqrt(c * t)


def classify_stage(value: float, kind: str = COORDINATION) -> StageLabel:
    """Map a C or D value onto its stage band; exactly 0 is ``Degenerate``."""
    if kind not in STAGES:
        raise ConfigInvalid(f"stage kind must be 'coupling' or 'coordination', got {kind!r}")
    if not (0.0 <= value <= 1.0):
        raise OutOfRangeInput(f"stage value must lie in [0, 1], got {value}")
    if value == 0.0:
        return DEGENERATE[kind]
    for stage in STAGES[kind]:
        if value <= stage.bounds[1]:
            return stage
    raise AssertionError("unreachable")  # pragma: no cover


def coordination_point(day: date, u: Sequence[float], weights: Optional[Weights] = None):
    c = coupling_degree(u)
    t = composite_level(u, weights)
    d = coordination_degree(c, t)
    return CoordinationPoint(
        day, c, t, d, classify_stage(c, COUPLING), classify_stage(d, COORDINATION)
    )


def coordination_series(
    panel: Panel,
    members: Sequence[str],
    config: NormalizationConfig = NormalizationConfig(),
    weights: Optional[Weights] = None,
) -> list[CoordinationPoint]:
    """Per-date (C, T, D) for a subset of the panel's indices.

    Level indices are computed on the full panel first, so the ``share``
    method measures each member against the whole pool.
    """
    members = list(members)
    if len(members) < 2:
        raise DimensionTooSmall(f"need at least 2 members, got {members}")
    unknown = [m for m in members if m not in panel.names]
    if unknown:
        raise UnknownMember(f"unknown members {unknown}; panel has {panel.names}")
    if weights is not None and len(weights) != len(members):
        raise LengthMismatch(f"{len(members)} members but {len(weights)} weights")
    cols = [panel.names.index(m) for m in members]
    u = level_matrix(panel, config)[:, cols]
    return [coordination_point(day, row, weights) for day, row in zip(panel.dates, u)]


def points_to_csv(points: Sequence[CoordinationPoint], precision: int = 6) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "c", "t", "d", "c_stage", "d_stage"])
    for p in points:
        w.writerow(
            [
                p.date.isoformat(),
                f"{p.c:.{precision}f}",
                f"{p.t:.{precision}f}",
                f"{p.d:.{precision}f}",
                p.c_stage.name,
                p.d_stage.name,
            ]
        )
    return buf.getvalue()
