"""``rotorkit`` command-line entry point.

Exit codes: 0 success, 1 config error, 2 input error, 3 analysis error.
Errors go to stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .config import COMMANDS, build_config, load_config_file, parse_window
from .errors import ConfigInvalid, RotorkitError
from .report import run_command


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigInvalid(message)


def _csv_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _pair(text: str) -> tuple[str, str]:
    parts = _csv_list(text)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected A,B got {text!r}")
    return parts[0], parts[1]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rotorkit", description="Coupling coordination, grey relational and rotation analysis of index GMV panels.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="CSV path or fixture:table2 (default)")
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--columns", type=_csv_list, help="value columns to read from the CSV (others ignored)")
    p.add_argument("--members", type=_csv_list, help="comma-separated index names")
    p.add_argument("--parent", help="reference index for GRA and pairwise coordination")
    p.add_argument("--weights", type=lambda s: [float(x) for x in _csv_list(s)], help="composite-level weights, one per member")
    p.add_argument("--format", dest="output_format", choices=("csv", "json"))
    p.add_argument("--output", dest="output_path", help="output file (default stdout)")
    p.add_argument("--plot-dir", help="report only: also write plot-ready CSVs here")
    p.add_argument("--precision", type=int, help="decimal places in numeric output (default 6)")
    p.add_argument("--dedupe", action="store_true", default=None, help="drop rows repeating the previous row")

    g = p.add_argument_group("normalization")
    g.add_argument("--method", dest="normalization.method", choices=("minmax", "share"))
    g.add_argument("--floor-epsilon", dest="normalization.floor_epsilon", type=float)
    g.add_argument("--constant-value", dest="normalization.constant_series_value", type=float)
    g.add_argument("--norm-window", dest="normalization.window", type=int, help="trailing window length in rows")

    g = p.add_argument_group("grey relational analysis")
    g.add_argument("--rho", dest="gra.rho", type=float)
    g.add_argument("--preprocessing", dest="gra.preprocessing", choices=("initial-value", "mean-value", "min-max", "none"))

    g = p.add_argument_group("rotation")
    g.add_argument("--band-ratio", dest="regime.band_ratio", type=float)
    g.add_argument("--min-window-days", dest="regime.min_window_days", type=int)
    g.add_argument("--share-threshold", type=float)
    g.add_argument("--window", dest="windows", action="append", type=parse_window, help="START:END window to test for rotation (repeatable)")
    g.add_argument("--comovement", action="append", type=_pair, help="A,B pair for change co-movement (repeatable)")
    g.add_argument("--comovement-window", type=parse_window, help="START:END")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = vars(build_parser().parse_args(argv))
        command = args.pop("command")
        cfg_path = args.pop("config")
        file_values = load_config_file(cfg_path) if cfg_path else {}
        config = build_config(command, file_values, args)
        text = run_command(config)
        if config.output_path:
            with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except RotorkitError as exc:
        return _fail(exc.exit_code, type(exc).__name__, str(exc))
    except OSError as exc:
        return _fail(2, "InputUnreadable", str(exc))


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
