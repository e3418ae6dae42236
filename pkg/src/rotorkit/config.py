"""Run configuration: TOML file values, overridden by command-line flags."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from datetime import date
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .coupling import Weights
from .errors import ConfigInvalid, RotorkitError
from .grey import GraConfig
from .level_index import NormalizationConfig
from .panel import parse_date
from .rotation import DEFAULT_SHARE_THRESHOLD, RegimeConfig

COMMANDS = ("validate", "coupling", "gra", "rotation", "report")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str = "fixture:table2"
    columns: Optional[tuple[str, ...]] = None
    members: Optional[tuple[str, ...]] = None
    parent: Optional[str] = None
    normalization: NormalizationConfig = field(default_factory=NormalizationConfig)
    gra: GraConfig = field(default_factory=GraConfig)
    regime: RegimeConfig = field(default_factory=RegimeConfig)
    weights: Optional[tuple[float, ...]] = None
    share_threshold: float = DEFAULT_SHARE_THRESHOLD
    windows: Optional[tuple[tuple[date, date], ...]] = None
    comovement: Optional[tuple[tuple[str, str], ...]] = None
    comovement_window: Optional[tuple[date, date]] = None
    dedupe: bool = False
    output_format: Optional[str] = None
    output_path: Optional[str] = None
    plot_dir: Optional[str] = None
    precision: int = 6

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigInvalid(f"unknown command {self.command!r}; choose from {COMMANDS}")
        if self.output_format is not None and self.output_format not in FORMATS:
            raise ConfigInvalid(f"output format must be csv or json, got {self.output_format!r}")
        if self.command == "coupling" and self.members is not None and len(self.members) < 2:
            raise ConfigInvalid("coupling needs at least 2 members")
        if not 0 <= self.precision <= 17:
            raise ConfigInvalid(f"precision must be in [0, 17], got {self.precision}")
        if not self.share_threshold > 0:
            raise ConfigInvalid(f"share_threshold must be > 0, got {self.share_threshold}")
        if self.weights is not None:
            Weights(self.weights)
        for start, end in (self.windows or ()) + ((self.comovement_window,) if self.comovement_window else ()):
            if not start < end:
                raise ConfigInvalid(f"window start {start} must precede end {end}")

    @property
    def format(self) -> str:
        if self.output_format:
            return self.output_format
        return "csv" if self.command == "coupling" else "json"

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, date):
                return v.isoformat()
            if isinstance(v, (tuple, list)):
                return [enc(x) for x in v]
            if hasattr(v, "__dataclass_fields__"):
                return {f.name: enc(getattr(v, f.name)) for f in fields(v)}
            return v

        d = enc(self)
        d["output_format"] = self.format
        return d


def _dates(pair, what: str) -> tuple[date, date]:
    try:
        start, end = pair
        return parse_date(str(start)), parse_date(str(end))
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad {what} {pair!r}: {exc}") from None


def parse_window(text: str) -> tuple[date, date]:
    """``START:END`` with ISO or slash dates."""
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigInvalid(f"window must look like START:END, got {text!r}")
    return _dates(parts, "window")


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc.strerror or exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(f"config {path}: {exc}") from None


def build_config(command: str, file_values: dict[str, Any], overrides: dict[str, Any]) -> RunConfig:
    """Merge file values and flag overrides (flags win; ``None`` means unset)."""
    flat = {k: v for k, v in file_values.items() if not isinstance(v, dict)}
    nested = {k: dict(v) for k, v in file_values.items() if isinstance(v, dict)}
    known_sections = {"normalization", "gra", "regime"}
    unknown = set(nested) - known_sections
    if unknown:
        raise ConfigInvalid(f"unknown config sections {sorted(unknown)}")

    for key, value in overrides.items():
        if value is None:
            continue
        if "." in key:
            section, name = key.split(".", 1)
            nested.setdefault(section, {})[name] = value
        else:
            flat[key] = value

    try:
        sections = {
            "normalization": NormalizationConfig(**nested.get("normalization", {})),
            "gra": GraConfig(**nested.get("gra", {})),
            "regime": RegimeConfig(**nested.get("regime", {})),
        }
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from None

    for key in ("members", "columns"):
        if key in flat:
            flat[key] = tuple(flat[key])
    if "weights" in flat:
        flat["weights"] = tuple(float(w) for w in flat["weights"])
    if "windows" in flat:
        flat["windows"] = tuple(
            w if isinstance(w[0], date) else _dates(w, "window") for w in flat["windows"]
        )
    if "comovement" in flat:
        flat["comovement"] = tuple(tuple(p) for p in flat["comovement"])
        if any(len(p) != 2 for p in flat["comovement"]):
            raise ConfigInvalid("comovement entries must be pairs of index names")
    if "comovement_window" in flat and not isinstance(flat["comovement_window"][0], date):
        flat["comovement_window"] = _dates(flat["comovement_window"], "comovement_window")

    valid = {f.name for f in fields(RunConfig)} - {"command", *known_sections}
    unknown = set(flat) - valid
    if unknown:
        raise ConfigInvalid(f"unknown config keys {sorted(unknown)}")
    try:
        return RunConfig(command=command, **sections, **flat)
    except RotorkitError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(str(exc)) from None
