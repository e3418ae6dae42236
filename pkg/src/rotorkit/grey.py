"""Grey relational analysis (Deng's formulation).

Given a parent (reference) sequence x0 and child sequences xi, after
preprocessing:

    delta_i(k) = |x0(k) - xi(k)|
    xi_i(k)    = (dmin + rho * dmax) / (delta_i(k) + rho * dmax)
    grade_i    = mean_k xi_i(k)

``dmin`` and ``dmax`` are pooled over every child and every k in the batch,
so grades from different batches are not comparable.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import date
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigInvalid, DimensionTooSmall, LengthMismatch, UnknownParent
from .panel import Panel

PREPROCESSING = ("initial-value", "mean-value", "min-max", "none")

# dmax at or below this fraction of the data scale counts as an all-zero batch
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class GraConfig:
    rho: float = 0.5
    preprocessing: str = "initial-value"

    def __post_init__(self):
        if not 0 < self.rho <= 1:
            raise ConfigInvalid(f"rho must be in (0, 1], got {self.rho}")
        if self.preprocessing not in PREPROCESSING:
            raise ConfigInvalid(
                f"preprocessing must be one of {PREPROCESSING}, got {self.preprocessing!r}"
            )


@dataclass
class GraResult:
    parent: str
    dates: tuple[date, ...]
    grades: dict[str, float]
    coefficients: dict[str, np.ndarray] = field(repr=False)

    def ranking(self) -> list[str]:
        """Children ordered from most to least related (ties keep batch order)."""
        return sorted(self.grades, key=lambda k: -self.grades[k])

    def to_dict(self) -> dict:
        return {
            "parent": self.parent,
            "grades": dict(self.grades),
            "ranking": self.ranking(),
        }

    def coefficients_csv(self, precision: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(self.coefficients)
        w.writerow(["date", *names])
        for k, day in enumerate(self.dates):
            w.writerow([day.isoformat(), *(f"{self.coefficients[n][k]:.{precision}f}" for n in names)])
        return buf.getvalue()


def preprocess(x: np.ndarray, method: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if method == "initial-value":
        return x / x[0]
    if method == "mean-value":
        return x / x.mean()
    if method == "min-max":
        span = x.max() - x.min()
        return np.zeros_like(x) if span == 0 else (x - x.min()) / span
    if method == "none":
        return x
    raise ConfigInvalid(f"unknown preprocessing {method!r}")


def gra_coefficients(parent, children, config: GraConfig = GraConfig()) -> np.ndarray:
    """Relational coefficients of one or more children against ``parent``.

    ``children`` is a single sequence (returns shape ``(len,)``) or a batch of
    sequences (returns ``(n_children, len)``). When every delta in the batch
    is zero (up to rounding, see ``DEGENERATE_RTOL``) the coefficients are all 1.
    """
    x0 = np.asarray(parent, dtype=np.float64)
    xs = np.asarray(children, dtype=np.float64)
    single = xs.ndim == 1
    xs = np.atleast_2d(xs)
    if len(x0) < 2:
        raise DimensionTooSmall("grey relational analysis needs sequences of length >= 2")
    if xs.shape[1] != len(x0):
        raise LengthMismatch(f"parent has {len(x0)} points, children have {xs.shape[1]}")

    p0 = preprocess(x0, config.preprocessing)
    px = np.stack([preprocess(x, config.preprocessing) for x in xs])
    delta = np.abs(px - p0)
    dmin, dmax = delta.min(), delta.max()
    scale = max(np.abs(p0).max(), np.abs(px).max())
    if dmax <= DEGENERATE_RTOL * scale:
        xi = np.ones_like(delta)
    else:
        xi = (dmin + config.rho * dmax) / (delta + config.rho * dmax)
    return xi[0] if single else xi


def gra_grades(panel: Panel, parent: str, config: GraConfig = GraConfig()) -> GraResult:
    if parent not in panel.names:
        raise UnknownParent(f"parent {parent!r} not in panel {panel.names}")
    children = [n for n in panel.names if n != parent]
    if not children:
        raise DimensionTooSmall("need at least one child series besides the parent")
    xi = gra_coefficients(
        panel[parent].values, [panel[c].values for c in children], config
    )
    coeffs = {c: xi[i] for i, c in enumerate(children)}
    return GraResult(
        parent=parent,
        dates=panel.dates,
        grades={c: float(np.mean(v)) for c, v in coeffs.items()},
        coefficients=coeffs,
    )


def grade_against(parent: Sequence[float], children: Mapping[str, Sequence[float]], config=GraConfig()):
    """Grades for a named batch of raw sequences, without building a panel."""
    names = list(children)
    xi = gra_coefficients(parent, [children[n] for n in names], config)
    return {n: float(np.mean(xi[i])) for i, n in enumerate(names)}
