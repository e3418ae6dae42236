"""Command implementations, the full-pipeline report and plot-ready CSV export."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from datetime import date
from typing import Any, Optional

import numpy as np

from .config import RunConfig
from .coupling import Weights, coordination_series, points_to_csv
from .errors import ConfigInvalid
from .grey import gra_grades
from .level_index import level_matrix
from .panel import (
    FIXTURE_NAME,
    TABLE2_COLUMNS,
    Panel,
    compute_aggregate,
    dedupe_stale_dates,
    load_panel,
    validate_panel,
)
from .rotation import (
    change_comovement,
    detect_rotation_episodes,
    detect_stock_fund_regime,
    rotation_episode,
    shares_to_csv,
)

# Phase boundaries and pairings used when the input is the embedded fixture.
TABLE2_PARENT = "SSE"
TABLE2_PHASES = (
    (date(2023, 1, 3), date(2023, 2, 1)),
    (date(2023, 2, 1), date(2023, 3, 15)),
    (date(2023, 3, 15), date(2023, 4, 7)),
)
TABLE2_COMOVEMENT = (("STAR50", "GEM"),)
TABLE2_COMOVEMENT_WINDOW = (date(2023, 2, 1), date(2023, 4, 7))


def round_floats(obj: Any, precision: int) -> Any:
    if isinstance(obj, float):
        return None if not math.isfinite(obj) else round(obj, precision)
    if isinstance(obj, dict):
        return {k: round_floats(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, precision) for v in obj]
    return obj


def dump_json(config: RunConfig, results: dict, warn: list[str]) -> str:
    doc = {"config": config.to_dict(), "results": results, "warnings": warn}
    return json.dumps(round_floats(doc, config.precision), indent=2) + "\n"


def _is_fixture(config: RunConfig, panel: Optional[Panel] = None) -> bool:
    """True for the embedded fixture with all of its columns loaded."""
    if config.input != FIXTURE_NAME:
        return False
    return panel is None or set(TABLE2_COLUMNS) <= set(panel.names)


def _parent(config: RunConfig, panel: Panel) -> str:
    if config.parent:
        return config.parent
    if _is_fixture(config):
        return TABLE2_PARENT
    raise ConfigInvalid(f"--parent is required for {config.command} (panel has {panel.names})")


def _weights(config: RunConfig, n: int) -> Optional[Weights]:
    if config.weights is None:
        return None
    if len(config.weights) != n:
        raise ConfigInvalid(f"{len(config.weights)} weights given for {n} members")
    return Weights(config.weights)


def _columns(panel: Panel, matrix: np.ndarray) -> dict:
    out = {"dates": [d.isoformat() for d in panel.dates]}
    for j, name in enumerate(panel.names):
        out[name] = [float(v) for v in matrix[:, j]]
    return out


def load(config: RunConfig) -> Panel:
    panel = load_panel(config.input, columns=config.columns)
    return dedupe_stale_dates(panel) if config.dedupe else panel


def _rotation_results(config: RunConfig, panel: Panel, warn: list[str]) -> dict:
    regimes = detect_stock_fund_regime(panel, config.regime)
    episodes = detect_rotation_episodes(panel, regimes, config.share_threshold)

    windows = config.windows
    if windows is None and _is_fixture(config, panel):
        windows = TABLE2_PHASES
    checked = []
    for start, end in windows or ():
        ep = rotation_episode(panel, start, end, config.share_threshold)
        inside = any(r.start <= start and end <= r.end for r in regimes)
        checked.append(
            {**ep.to_dict(), "rotation": bool(ep.donors or ep.recipients), "within_regime": inside}
        )
        if not inside:
            warn.append(
                f"window {start.isoformat()}..{end.isoformat()} is not inside one stock-fund "
                "regime; share shifts there may reflect net inflow or outflow"
            )

    pairs = config.comovement
    cwin = config.comovement_window
    if pairs is None and _is_fixture(config, panel):
        pairs, cwin = TABLE2_COMOVEMENT, cwin or TABLE2_COMOVEMENT_WINDOW
    comove = []
    for a, b in pairs or ():
        start, end = cwin or (panel.dates[0], panel.dates[-1])
        comove.append(
            {
                "a": a,
                "b": b,
                "start": start.isoformat(),
                "end": end.isoformat(),
                "correlation": change_comovement(panel[a], panel[b], start, end),
            }
        )

    return {
        "regimes": [r.to_dict() for r in regimes],
        "episodes": [e.to_dict() for e in episodes],
        "windows": checked,
        "comovement": comove,
    }


def reference_checks(panel: Panel, results: dict) -> list[dict]:
    """Compare fixture results against the figures quoted alongside the data.

    Each entry records the stated claim, what the data gives, and whether
    they agree; disagreements are reported, never corrected.
    """
    checks = []
    agg = compute_aggregate(panel.between(date(2023, 1, 16), date(2023, 4, 7)))
    lo, hi = float(agg.min()) / 1e4, float(agg.max()) / 1e4
    checks.append(
        {
            "check": "aggregate_range_trillion",
            "stated": [8.6, 8.9],
            "computed": [lo, hi],
            "agrees": 8.6 <= lo and hi <= 8.9,
            "note": "data sits about 10x above the stated range; likely a unit slip "
            "(values are RMB 100 million)",
        }
    )

    for w in results.get("windows", []):
        if (w["start"], w["end"]) == ("2023-02-01", "2023-03-15"):
            rose = [k for k in ("STAR50", "GEM", "SZI") if w["returns"][k] > 0]
            checks.append(
                {
                    "check": "non_parent_indices_fell",
                    "window": [w["start"], w["end"]],
                    "stated": "STAR50, GEM and SZI all fell",
                    "computed": {k: w["returns"][k] for k in ("STAR50", "GEM", "SZI")},
                    "agrees": not rose,
                    "note": f"rose instead: {', '.join(rose)}" if rose else "",
                }
            )
            checks.append(
                {
                    "check": "funds_into_parent",
                    "window": [w["start"], w["end"]],
                    "stated": "SSE gains share",
                    "computed": w["share_delta"]["SSE"],
                    "agrees": "SSE" in w["recipients"],
                    "note": "",
                }
            )

    for c in results.get("comovement", []):
        if (c["a"], c["b"]) == ("STAR50", "GEM"):
            checks.append(
                {
                    "check": "star50_gem_comovement_sign",
                    "window": [c["start"], c["end"]],
                    "stated": "negative",
                    "computed": c["correlation"],
                    "agrees": c["correlation"] < 0,
                    "note": "Pearson correlation of day-over-day GMV changes",
                }
            )

    pair = results.get("coordination", {}).get("pairs", {}).get("SSE-STAR50")
    if pair:
        april = [p for p in pair if "2023-04-03" <= p["date"] <= "2023-04-07"]
        checks.append(
            {
                "check": "sse_star50_coordination_early_april",
                "stated": {"d": 0.41, "stage": "Low-level coordination stage"},
                "computed": {p["date"]: p["d"] for p in april},
                "agrees": all(0.3 < p["d"] <= 0.5 for p in april),
                "note": "band check only; the level-index normalization behind the stated "
                "figure is not given",
            }
        )
    return checks


def build_report(config: RunConfig, panel: Panel, warn: list[str]) -> dict:
    """validate -> level indices -> pairwise coordination vs parent -> GRA -> regimes -> episodes."""
    parent = _parent(config, panel)
    if parent not in panel.names:
        raise ConfigInvalid(f"parent {parent!r} not in panel {panel.names}")
    members = list(config.members) if config.members is not None else panel.names
    others = [m for m in members if m != parent]
    if not others:
        warn.append("no members besides the parent: no pairwise coordination series")

    results: dict[str, Any] = {
        "panel": {
            "rows": len(panel),
            "start": panel.dates[0].isoformat(),
            "end": panel.dates[-1].isoformat(),
            "series": panel.names,
        },
        "validation": [v.to_dict() for v in validate_panel(panel)],
    }
    m = panel.matrix
    agg = compute_aggregate(panel)
    results["aggregate"] = {
        "dates": [d.isoformat() for d in panel.dates],
        "values": [float(v) for v in agg],
    }
    results["trends"] = _columns(panel, m / m[0])
    results["level_indices"] = _columns(panel, level_matrix(panel, config.normalization))

    pairs = {}
    for other in others:
        pts = coordination_series(panel, [parent, other], config.normalization)
        pairs[f"{parent}-{other}"] = [p.to_dict() for p in pts]
    coordination: dict[str, Any] = {"parent": parent, "pairs": pairs}
    if len(members) >= 2:
        pts = coordination_series(
            panel, members, config.normalization, _weights(config, len(members))
        )
        coordination["members"] = members
        coordination["all"] = [p.to_dict() for p in pts]
    results["coordination"] = coordination

    results["gra"] = gra_grades(panel, parent, config.gra).to_dict()
    results.update(_rotation_results(config, panel, warn))
    if _is_fixture(config, panel):
        results["reference_checks"] = reference_checks(panel, results)
    return results


def run_command(config: RunConfig) -> str:
    """Execute one command and return its rendered output text."""
    warn: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        panel = load(config)
    warn.extend(str(w.message) for w in caught)
    fmt = config.format

    if config.command == "validate":
        violations = validate_panel(panel)
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["kind", "date", "column", "observed", "expected", "detail"])
            for v in violations:
                d = v.to_dict()
                w.writerow([d[k] if d[k] is not None else "" for k in ("kind", "date", "column", "observed", "expected", "detail")])
            return buf.getvalue()
        results = {"rows": len(panel), "valid": not violations, "violations": [v.to_dict() for v in violations]}
        return dump_json(config, results, warn)

    if config.command == "coupling":
        members = list(config.members) if config.members is not None else panel.names
        pts = coordination_series(
            panel, members, config.normalization, _weights(config, len(members))
        )
        if fmt == "csv":
            return points_to_csv(pts, config.precision)
        return dump_json(config, {"members": members, "points": [p.to_dict() for p in pts]}, warn)

    if config.command == "gra":
        res = gra_grades(panel, _parent(config, panel), config.gra)
        if fmt == "csv":
            return res.coefficients_csv(config.precision)
        return dump_json(config, res.to_dict(), warn)

    if config.command == "rotation":
        if fmt == "csv":
            return shares_to_csv(panel, config.precision)
        results = _rotation_results(config, panel, warn)
        if _is_fixture(config, panel):
            results["reference_checks"] = reference_checks(panel, results)
        return dump_json(config, results, warn)

    if fmt != "json":
        raise ConfigInvalid("report output is JSON only")
    results = build_report(config, panel, warn)
    text = dump_json(config, results, warn)
    if config.plot_dir:
        emit_plot_series(json.loads(text), config.plot_dir, precision=config.precision)
    return text


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_plot_series(report: dict, out_dir: str, precision: int = 6) -> dict[str, str]:
    """Write plot-ready CSVs from a ``report`` document.

    Files:
        ``aggregate.csv``: date, aggregate (sum of index GMVs).
        ``index_trends.csv``: date, then each index's GMV relative to its first date.
        ``coordination_<parent>-<member>.csv``: date, c, t, d, d_stage; one per pair.

    Returns a mapping of file stem to written path.
    """
    results = report.get("results", report)
    os.makedirs(out_dir, exist_ok=True)
    fmt = lambda v: f"{v:.{precision}f}"  # noqa: E731
    written = {}

    agg = results["aggregate"]
    path = os.path.join(out_dir, "aggregate.csv")
    _write_csv(path, ["date", "aggregate"], ([d, fmt(v)] for d, v in zip(agg["dates"], agg["values"])))
    written["aggregate"] = path

    trends = results["trends"]
    names = [k for k in trends if k != "dates"]
    path = os.path.join(out_dir, "index_trends.csv")
    _write_csv(
        path,
        ["date", *names],
        ([d, *(fmt(trends[n][i]) for n in names)] for i, d in enumerate(trends["dates"])),
    )
    written["index_trends"] = path

    pairs = results.get("coordination", {}).get("pairs", {})
    if not pairs:
        warnings.warn("no coordination pairs in report: no D-series files written", stacklevel=2)
    for key, pts in pairs.items():
        stem = f"coordination_{key}"
        path = os.path.join(out_dir, f"{stem}.csv")
        _write_csv(
            path,
            ["date", "c", "t", "d", "d_stage"],
            ([p["date"], fmt(p["c"]), fmt(p["t"]), fmt(p["d"]), p["d_stage"]] for p in pts),
        )
        written[stem] = path
    return written
